"""Kernel classifiers consuming precomputed Gram matrices."""
