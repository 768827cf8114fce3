"""Numerical toolkit for reflectionless canonical systems on finite gap sets."""

__version__ = "0.1.0"
