"""Numerical Fredholm and equivariant indices of finite matrix models."""

__version__ = "0.1.0"
