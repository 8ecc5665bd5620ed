"""Hybrid lemmatizer: lookup table, edit-tree classifier and correction rules."""

__version__ = "0.1.0"
