"""Utility functions used throughout the quantum-path-kernel package."""

from __future__ import annotations

import hashlib
import json
import logging
import sys
from datetime import datetime

import numpy as np


def get_logger(
    name: str,
    level=logging.DEBUG,
    log_format="%(asctime)s %(levelname)s %(name)s %(message)s",
    stream=sys.stdout,
):
    """Code borrowed from the atomate package.

    Helper method for acquiring logger.
    """
    logger = logging.getLogger(name)
    logger.setLevel(level)

    formatter = logging.Formatter(log_format)

    if logger.hasHandlers():
        logger.handlers.clear()

    sh = logging.StreamHandler(stream=stream)
    sh.setFormatter(formatter)

    logger.addHandler(sh)

    return logger


def datetime_str() -> str:
    """Get a string representation of the current time. Borrowed from atomate2 package."""
    return str(datetime.utcnow())


def array_hash(*arrays: np.ndarray) -> str:
    """Content hash (SHA-256 hex digest) of one or more arrays, covering dtype, shape and
    raw bytes. Used to tie artifacts (datasets, trajectories) to their consumers.
    """
    h = hashlib.sha256()
    for arr in arrays:
        arr = np.ascontiguousarray(arr)
        h.update(str(arr.dtype).encode())
        h.update(str(arr.shape).encode())
        h.update(arr.tobytes())
    return h.hexdigest()


def dict_hash(d: dict, length: int = 12) -> str:
    """Stable hash of a JSON-serializable dictionary (keys sorted)."""
    payload = json.dumps(d, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()[:length]


def derive_seed(seed: int, *keys: int | float | str) -> int:
    """Derive an independent 63-bit child seed from a root seed and a sequence of keys.

    The keys are folded into a numpy SeedSequence, so the same (seed, keys) always
    gives the same child seed regardless of call order elsewhere in the program.
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for key in keys:
        digest = hashlib.sha256(repr(key).encode()).digest()
        entropy.append(int.from_bytes(digest[:8], "little"))
    state = np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)
    return int(state[0] >> np.uint64(1))
