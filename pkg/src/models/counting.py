"""
Sharp Lattice Point Counting

Exact counts N_Λ(t) = #{v ∈ Λ : |v| ≤ t} computed row by row, and the
normalized annulus remainder

    S_Λ(t, ρ) = [N_Λ(t+ρ) − N_Λ(t) − (π/d)(2tρ + ρ²)] / √t.
"""

import logging
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from ..utils.errors import DomainError
from .lattice import EllipseLattice, Side, row_extents

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnnulusParams:
    """
    Scales of an annulus experiment.

    Attributes:
        T: Ensemble scale (radii are drawn around T)
        L: Inverse annulus width
        M: Smoothness parameter; defaults to L³
        rho: Annulus width 1/L
    """

    T: float
    L: float
    M: Optional[float] = None
    rho: float = field(init=False)

    def __post_init__(self):
        M = self.L ** 3 if self.M is None else self.M
        for name, value in (("T", self.T), ("L", self.L), ("M", M)):
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be positive, got {value}")
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "M", float(M))
        object.__setattr__(self, "rho", 1.0 / float(self.L))
        if self.L > math.sqrt(self.M):
            message = f"L = {self.L:g} exceeds sqrt(M) = {math.sqrt(self.M):g}; smoothing is coarser than the annulus"
            logger.warning(message)
            warnings.warn(message, RuntimeWarning, stacklevel=2)


def _row_sum(lat: EllipseLattice, t: float, strict: bool) -> int:
    t = float(t)
    if t < 0:
        raise DomainError(f"radius must be non-negative, got {t}")
    m_max = int(math.floor(t / lat.alpha)) + 1
    rows = np.arange(0, m_max + 1, dtype=np.int64)
    extents = row_extents(lat, Side.PRIMAL, rows, t * t, Fraction(t) ** 2, strict=strict)
    widths = np.where(extents >= 0, 2 * extents + 1, 0)
    return int(widths[0] + 2 * widths[1:].sum())


def count_sharp(lat: EllipseLattice, t: float) -> int:
    """
    Number of lattice vectors in the closed disc of radius t.

    Args:
        lat: Lattice
        t: Radius (≥ 0)

    Returns:
        Exact count
    """
    return _row_sum(lat, t, strict=False)


def count_open(lat: EllipseLattice, t: float) -> int:
    """Number of lattice vectors with |v| < t."""
    return _row_sum(lat, t, strict=True)


def count_jump_convention(lat: EllipseLattice, t: float) -> float:
    """
    Count with the boundary circle weighted by one half.

    Equals the open count plus 2 when t is the norm of a single off-axis
    orbit, and the plain count when no vector lies on the circle.
    """
    closed = count_sharp(lat, t)
    opened = count_open(lat, t)
    return opened + 0.5 * (closed - opened)


def annulus_count(lat: EllipseLattice, t: float, rho: float) -> int:
    """Number of vectors with t < |v| ≤ t + ρ."""
    return count_sharp(lat, t + rho) - count_sharp(lat, t)


def area_increment(lat: EllipseLattice, t: float, rho: float) -> float:
    """Expected annulus count (π/d)(2tρ + ρ²)."""
    return math.pi / lat.det_d * (2.0 * t * rho + rho * rho)


def remainder_sharp(lat: EllipseLattice, t: float, rho: float) -> float:
    """
    Normalized remainder of the annulus count.

    Args:
        lat: Lattice
        t: Inner radius (> 0)
        rho: Annulus width (> 0)

    Returns:
        [N(t+ρ) − N(t) − (π/d)(2tρ+ρ²)] / √t
    """
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho}")
    return (annulus_count(lat, t, rho) - area_increment(lat, t, rho)) / math.sqrt(t)


def remainder_sharp_batch(lat: EllipseLattice, ts: np.ndarray, rho: float) -> np.ndarray:
    """remainder_sharp over an array of radii."""
    return np.array([remainder_sharp(lat, float(t), rho) for t in np.asarray(ts, dtype=np.float64)])
