"""
Smoothing Kernel and Smoothed Counting

The kernel ψ̂ is the autocorrelation of the bump φ(x) = exp(−1/(1/4 − x²))
on |x| < 1/2, normalized to ψ̂(0) = 1 and supported on [−1, 1]. The smoothed
count and remainder are dual-lattice trigonometric sums damped by
ψ̂(|k|/√M), so only dual vectors with |k| < √M contribute.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Tuple, Union

import numpy as np
import pandas as pd
from scipy.interpolate import PchipInterpolator

from ..utils.errors import DomainError
from ..utils.precision import compensated_sum, reduced_phase, two_sum
from .lattice import DEFAULT_MAX_VECTORS, EllipseLattice, Side, radial_shells

logger = logging.getLogger(__name__)

MIN_GRID_POINTS = 256
DEFAULT_GRID_POINTS = 4096
# terms in flight (rows of t times dual shells) across all workers; each term
# holds about ten float64 temporaries while a chunk is evaluated
CHUNK_TERMS_BUDGET = 1 << 22
MIN_CHUNK_TERMS = 1 << 16


def bump(x: np.ndarray) -> np.ndarray:
    """φ(x) = exp(−1/(1/4 − x²)) for |x| < 1/2, zero outside."""
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    inside = np.abs(x) < 0.5
    out[inside] = np.exp(-1.0 / (0.25 - x[inside] ** 2))
    return out


@dataclass(frozen=True)
class SmoothingKernel:
    """
    Tabulated ψ̂ on [0, 1] with monotone cubic interpolation.

    Attributes:
        grid: Samples of ψ̂ at x_j = j·grid_step
        grid_step: Spacing of the samples
        support_radius: ψ̂ vanishes for |x| ≥ support_radius
    """

    grid: np.ndarray
    grid_step: float
    support_radius: float = 1.0
    _interpolant: PchipInterpolator = field(default=None, repr=False, compare=False)

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(len(self.grid)) * self.grid_step

    def __call__(self, x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        a = np.abs(np.asarray(x, dtype=np.float64))
        out = np.zeros_like(a)
        inside = a < self.support_radius
        if np.any(inside):
            out[inside] = np.clip(self._interpolant(a[inside]), 0.0, 1.0)
        return float(out) if out.ndim == 0 else out

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"x": self.nodes, "psi_hat": self.grid})

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
        return path


def build_kernel(grid_points: int = DEFAULT_GRID_POINTS) -> SmoothingKernel:
    """
    Tabulate ψ̂ = φ ⋆ φ* by numeric correlation on a uniform grid.

    Args:
        grid_points: Number of samples on [0, 1] (≥ 256)

    Returns:
        SmoothingKernel
    """
    grid_points = int(grid_points)
    if grid_points < MIN_GRID_POINTS:
        raise DomainError(f"kernel grid too coarse: {grid_points} < {MIN_GRID_POINTS}")
    step = 1.0 / (grid_points - 1)
    y = -0.5 + np.arange(grid_points) * step
    phi = bump(y)
    correlation = np.correlate(phi, phi, mode="full")[grid_points - 1:]
    values = np.clip(correlation / correlation[0], 0.0, 1.0)
    values[0] = 1.0
    values[-1] = 0.0
    nodes = np.arange(grid_points) * step
    logger.debug(f"Kernel tabulated on {grid_points} points")
    return SmoothingKernel(grid=values, grid_step=step, _interpolant=PchipInterpolator(nodes, values))


@lru_cache(maxsize=32)
def _dual_shells(lat: EllipseLattice, radius: float, max_vectors: int) -> Tuple[np.ndarray, np.ndarray]:
    norms, weights = radial_shells(lat, Side.DUAL, radius, strict=True, max_vectors=max_vectors)
    norms.setflags(write=False)
    weights.setflags(write=False)
    return norms, weights


def damped_shells(
    lat: EllipseLattice,
    kernel: SmoothingKernel,
    M: float,
    radius: float = None,
    max_vectors: int = DEFAULT_MAX_VECTORS,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Dual shells |k| with nonzero damping, and weights r(k)·ψ̂(|k|/√M).

    Args:
        lat: Lattice
        kernel: Smoothing kernel
        M: Smoothness parameter
        radius: Enumeration radius (defaults to √M)
        max_vectors: Enumeration budget

    Returns:
        Tuple (norms, damped weights), norms ascending
    """
    if not M > 0:
        raise DomainError(f"M must be positive, got {M}")
    root_m = math.sqrt(M)
    norms, weights = _dual_shells(lat, float(radius if radius is not None else root_m), int(max_vectors))
    psi = kernel(norms / root_m)
    keep = psi > 0
    return norms[keep], weights[keep] * psi[keep]


def chunk_terms_for(workers: int) -> int:
    """Per-worker chunk size that keeps the total in flight near CHUNK_TERMS_BUDGET."""
    return max(MIN_CHUNK_TERMS, CHUNK_TERMS_BUDGET // max(1, int(workers)))


def oscillatory_sum(
    ts: np.ndarray,
    shift: float,
    norms: np.ndarray,
    amplitudes: np.ndarray,
    trig,
    chunk_terms: int = CHUNK_TERMS_BUDGET,
) -> np.ndarray:
    """
    Σ_k amplitudes·trig(2π(t + shift)|k| + π/4) for each t, in |k| order.

    Rows of t are evaluated independently, so `chunk_terms` bounds memory
    without changing any value.
    """
    out = np.zeros(len(ts))
    if len(norms) == 0:
        return out
    u_hi, u_lo = two_sum(ts, shift)
    rows = max(1, int(chunk_terms) // len(norms))
    for start in range(0, len(ts), rows):
        sl = slice(start, start + rows)
        phase = reduced_phase(u_hi[sl, None], u_lo[sl, None], norms[None, :])
        terms = amplitudes[None, :] * trig(2.0 * math.pi * phase + math.pi / 4.0)
        out[sl] = compensated_sum(terms, axis=1)
    return out


def smooth_count_batch(
    lat: EllipseLattice,
    kernel: SmoothingKernel,
    M: float,
    ts: np.ndarray,
    radius: float = None,
    max_vectors: int = DEFAULT_MAX_VECTORS,
    chunk_terms: int = CHUNK_TERMS_BUDGET,
) -> np.ndarray:
    """Smoothed count Ñ(t) for every t in ts."""
    ts = np.asarray(ts, dtype=np.float64)
    if np.any(ts <= 0):
        raise DomainError("t must be positive")
    norms, damped = damped_shells(lat, kernel, M, radius, max_vectors)
    amplitudes = damped / norms ** 1.5
    total = oscillatory_sum(ts, 0.0, norms, amplitudes, np.cos, chunk_terms)
    d = lat.det_d
    return math.pi * ts * ts / d - np.sqrt(ts) / (d * math.pi) * total


def smooth_count(
    lat: EllipseLattice,
    kernel: SmoothingKernel,
    M: float,
    t: float,
    radius: float = None,
    max_vectors: int = DEFAULT_MAX_VECTORS,
) -> float:
    """
    Smoothed counting function

        Ñ(t) = πt²/d − (√t/(dπ)) Σ_{k≠0} cos(2πt|k| + π/4) ψ̂(|k|/√M) / |k|^{3/2}.

    Args:
        lat: Lattice
        kernel: Smoothing kernel
        M: Smoothness parameter
        t: Radius (> 0)
        radius: Dual enumeration radius (defaults to √M)
        max_vectors: Enumeration budget

    Returns:
        Ñ(t)
    """
    return float(smooth_count_batch(lat, kernel, M, np.array([t]), radius, max_vectors)[0])


def smooth_remainder_batch(
    lat: EllipseLattice,
    kernel: SmoothingKernel,
    M: float,
    L: float,
    ts: np.ndarray,
    radius: float = None,
    max_vectors: int = DEFAULT_MAX_VECTORS,
    chunk_terms: int = CHUNK_TERMS_BUDGET,
) -> np.ndarray:
    """Smoothed remainder S̃(t) for every t in ts."""
    ts = np.asarray(ts, dtype=np.float64)
    if np.any(ts <= 0):
        raise DomainError("t must be positive")
    if not L > 0:
        raise DomainError(f"L must be positive, got {L}")
    norms, damped = damped_shells(lat, kernel, M, radius, max_vectors)
    amplitudes = damped * np.sin(math.pi * norms / L) / norms ** 1.5
    total = oscillatory_sum(ts, 1.0 / (2.0 * L), norms, amplitudes, np.sin, chunk_terms)
    return 2.0 / (lat.det_d * math.pi) * total


def smooth_remainder(
    lat: EllipseLattice,
    kernel: SmoothingKernel,
    M: float,
    L: float,
    t: float,
    radius: float = None,
    max_vectors: int = DEFAULT_MAX_VECTORS,
) -> float:
    """
    Smoothed normalized remainder

        S̃(t) = (2/(dπ)) Σ_{k≠0} sin(π|k|/L) sin(2π(t + 1/(2L))|k| + π/4) ψ̂(|k|/√M) / |k|^{3/2}.

    Args:
        lat: Lattice
        kernel: Smoothing kernel
        M: Smoothness parameter
        L: Inverse annulus width
        t: Radius (> 0)
        radius: Dual enumeration radius (defaults to √M)
        max_vectors: Enumeration budget

    Returns:
        S̃(t)
    """
    return float(smooth_remainder_batch(lat, kernel, M, L, np.array([t]), radius, max_vectors)[0])
