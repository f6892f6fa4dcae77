"""Expected (invariable) generation waiting times for products of small simple groups."""

__version__ = "0.1.0"
