"""Helpful utilities for the qpk package."""
