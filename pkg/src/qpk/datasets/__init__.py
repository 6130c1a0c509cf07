"""Synthetic benchmark datasets."""
