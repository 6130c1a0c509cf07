"""Jobs for the quantum-path-kernel package."""
