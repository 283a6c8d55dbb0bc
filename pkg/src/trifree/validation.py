"""Argument checks shared by the estimator wrappers and the harness."""

from __future__ import annotations

import numbers

import numpy as np

from .graph_core import EdgePartition, Graph


def check_fraction(value, name: str, closed_right: bool = False) -> float:
    if not isinstance(value, numbers.Real):
        raise TypeError(f"{name} must be a real number")
    ok = 0 < value <= 1 if closed_right else 0 < value < 1
    if not ok:
        raise ValueError(f"{name} must lie in (0, 1{']' if closed_right else ')'}, got {value}")
    return float(value)


def check_positive_int(value, name: str) -> int:
    if not isinstance(value, numbers.Integral) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_instances(X) -> list:
    """Accept one graph or partition, or a sequence of them."""
    if isinstance(X, (Graph, EdgePartition)):
        return [X]
    items = list(X)
    for item in items:
        if not isinstance(item, (Graph, EdgePartition)):
            raise TypeError(f"expected Graph or EdgePartition, got {type(item).__name__}")
    return items


def check_points(n_values, bits) -> tuple[np.ndarray, np.ndarray]:
    n_values = np.asarray(n_values, dtype=float).ravel()
    bits = np.asarray(bits, dtype=float).ravel()
    if n_values.shape != bits.shape:
        raise ValueError("n_values and bits must have the same length")
    if (n_values <= 0).any() or (bits <= 0).any():
        raise ValueError("points must be positive")
    return n_values, bits
