"""Command-line front end (argparse)."""

from .main import main

__all__ = ["main"]
