"""Operator knowledge base construction for Earth Engine JavaScript corpora."""

__version__ = "0.1.0"
