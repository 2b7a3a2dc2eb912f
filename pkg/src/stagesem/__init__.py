"""Semantics of first-order logic over directed families of finite stages."""

__version__ = "0.1.0"
