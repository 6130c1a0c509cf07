"""The quantum-path-kernel package."""

from __future__ import annotations

from importlib.metadata import version

__version__ = version("quantum-path-kernel")
