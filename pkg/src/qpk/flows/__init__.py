"""Flows for the quantum-path-kernel package."""
