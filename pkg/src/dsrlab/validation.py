"""Small argument-checking helpers shared across the package."""

import numpy as np


def require(condition, message):
    """Raise ValueError with `message` unless `condition` holds."""
    if not condition:
        raise ValueError(message)


def as_finite_array(x, name, dtype=float):
    arr = np.asarray(x, dtype=dtype)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_seed(seed):
    if not isinstance(seed, (int, np.integer)):
        raise ValueError(f"seed must be an integer, got {type(seed).__name__}")
    return int(seed)


def is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0
