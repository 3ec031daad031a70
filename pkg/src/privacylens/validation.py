"""Input-validation helpers used by the estimator-style classes."""

import numpy as np


def check_vector(v, name="vector"):
    """Coerce to a 1-D float64 array."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    return arr


def check_same_length(a, b, name_a="a", name_b="b"):
    if len(a) != len(b):
        raise ValueError(f"{name_a} and {name_b} differ in length: {len(a)} vs {len(b)}")


def check_probability(x, name="probability"):
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x}")
    return float(x)


def check_distribution(p, name="distribution", tol=1e-9):
    """Validate a discrete probability distribution (non-negative, sums to 1)."""
    arr = check_vector(p, name)
    if (arr < 0).any():
        raise ValueError(f"{name} has negative mass")
    total = arr.sum()
    if abs(total - 1.0) > tol:
        raise ValueError(f"{name} sums to {total}, expected 1 +/- {tol}")
    return arr


def check_positive(x, name="value"):
    if x <= 0:
        raise ValueError(f"{name} must be positive, got {x}")
    return x


def check_non_empty(seq, name="sequence"):
    if len(seq) == 0:
        raise ValueError(f"{name} must be non-empty")
    return seq
