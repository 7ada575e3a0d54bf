"""Tipping-point prediction for slowly drifted, periodically forced fold systems."""
__version__ = "0.1.0"
