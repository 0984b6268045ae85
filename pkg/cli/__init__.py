"""Command-line interface for ChabautyLab."""

from .app import main

__all__ = ["main"]
