"""Spatio-temporal perception logic over object-detection streams."""

__version__ = "0.1.0"
