"""
Command-line front end.
"""

from .main import main, build_parser

__all__ = [
    "main",
    "build_parser",
]
