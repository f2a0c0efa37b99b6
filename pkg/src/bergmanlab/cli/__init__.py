"""Command-line interface, run configuration, cache and scenarios."""

from .main import main

__all__ = ["main"]
