"""Differentiable predictors: quantum neural networks and the classical ReLU network."""
