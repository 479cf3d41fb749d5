"""Pairwise quantum discord versus distance in exactly tractable spin chains."""
__version__ = "0.1.0"
