"""
Precision Utilities for Oscillatory Lattice Sums

Error-free transformations and compensated reductions used by the
dual-lattice trigonometric sums:
- two_sum / two_product: Knuth and Dekker error-free transformations (vectorized)
- reduced_phase: fractional part of u*k carried in double-double
- compensated_sum: fixed-order blockwise summation with Neumaier compensation
"""

import threading
from typing import Tuple, Union

import numpy as np

ArrayLike = Union[float, np.ndarray]

# Dekker splitting constant for IEEE double: 2**27 + 1
SPLITTER = 134217729.0

DEFAULT_BLOCK = 1024

# mpmath keeps its working precision in a process-wide context
MPMATH_LOCK = threading.RLock()


def two_sum(a: ArrayLike, b: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    """
    Knuth two-sum: a + b = s + e exactly.

    Args:
        a: First addend(s)
        b: Second addend(s)

    Returns:
        Tuple (s, e) with s = fl(a + b)
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def _split(a: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    c = SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_product(a: ArrayLike, b: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    """
    Dekker two-product: a * b = p + e exactly (barring overflow).

    Args:
        a: First factor(s)
        b: Second factor(s)

    Returns:
        Tuple (p, e) with p = fl(a * b)
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    p = a * b
    a_hi, a_lo = _split(a)
    b_hi, b_lo = _split(b)
    e = ((a_hi * b_hi - p) + a_hi * b_lo + a_lo * b_hi) + a_lo * b_lo
    return p, e


def reduced_phase(u_hi: ArrayLike, u_lo: ArrayLike, k: ArrayLike) -> np.ndarray:
    """
    Fractional part of (u_hi + u_lo) * k in [0, 1).

    The leading product is split error-free and its integer part removed
    exactly before the low-order terms are added back.

    Args:
        u_hi: Leading part of the multiplier (e.g. the radius t)
        u_lo: Trailing part of the multiplier
        k: Frequencies |k|

    Returns:
        Array of reduced phases, broadcast over the inputs
    """
    p, e = two_product(u_hi, k)
    frac = p - np.floor(p)
    frac = frac + (e + np.asarray(u_lo, dtype=np.float64) * k)
    return frac - np.floor(frac)


def compensated_sum(values: np.ndarray, axis: int = -1, block: int = DEFAULT_BLOCK) -> np.ndarray:
    """
    Sum along an axis in fixed order with compensation across blocks.

    Each block of `block` consecutive terms is reduced pairwise by numpy;
    block partials are then accumulated left to right with Neumaier's
    correction. The result depends only on the order of `values`.

    Args:
        values: Terms to add
        axis: Axis to reduce
        block: Number of terms per block

    Returns:
        Array with `axis` removed
    """
    values = np.moveaxis(np.asarray(values, dtype=np.float64), axis, -1)
    n = values.shape[-1]
    total = np.zeros(values.shape[:-1])
    compensation = np.zeros(values.shape[:-1])
    for start in range(0, n, block):
        partial = values[..., start:start + block].sum(axis=-1)
        t = total + partial
        big = np.abs(total) >= np.abs(partial)
        compensation += np.where(big, (total - t) + partial, (partial - t) + total)
        total = t
    return total + compensation


def neumaier_sum(values) -> float:
    """Scalar Neumaier summation in the given order."""
    total = 0.0
    compensation = 0.0
    for val in values:
        val = float(val)
        t = total + val
        if abs(total) >= abs(val):
            compensation += (total - t) + val
        else:
            compensation += (val - t) + total
        total = t
    return total + compensation
