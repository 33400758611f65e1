"""Exact computer algebra for dialgebras and associative triple trisystems."""

__version__ = "0.1.0"
