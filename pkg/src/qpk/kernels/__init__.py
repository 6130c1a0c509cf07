"""Kernel constructions: tangent, path, effective path and random-feature Gram matrices."""
