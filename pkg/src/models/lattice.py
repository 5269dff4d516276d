"""
Rectangular Lattices and Their Spectra

Lattice Λ = ⟨1, iα⟩ and its dual Λ* = ⟨1, iβ⟩ with β = 1/α. Vectors are
integer pairs (n, m) with squared norm n² + m²·γ (primal, γ = α²) or
n² + m²·κ (dual, κ = β²).

Row extents are computed by square roots in double precision; any row whose
boundary test falls within 1e-9·radius² of equality is re-decided with exact
rational arithmetic on the stored doubles.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from ..utils.errors import DomainError, ResourceError, UsageError

logger = logging.getLogger(__name__)

DEFAULT_MAX_VECTORS = 100_000_000
BOUNDARY_TOLERANCE = 1e-9
MERGE_TOLERANCE = 1e-12

PRESETS: Dict[str, float] = {
    "e": math.e,
    "sqrt2": math.sqrt(2.0),
    "two_pow_quarter": 2.0 ** 0.25,
    "golden": (1.0 + math.sqrt(5.0)) / 2.0,
    "one": 1.0,
}


class Side(str, Enum):
    """Which of the two lattices a vector belongs to."""

    PRIMAL = "primal"
    DUAL = "dual"


@dataclass(frozen=True)
class EllipseLattice:
    """
    Rectangular lattice ⟨1, iα⟩ with the derived constants of both sides.

    Attributes:
        alpha: Aspect ratio α > 0
        gamma: α²
        beta: 1/α
        kappa: β²
        det_d: Covolume d = α
        label: Preset name when built from one
    """

    alpha: float
    label: Optional[str] = field(default=None, compare=False)
    gamma: float = field(init=False)
    beta: float = field(init=False)
    kappa: float = field(init=False)
    det_d: float = field(init=False)

    def __post_init__(self):
        alpha = float(self.alpha)
        if not math.isfinite(alpha) or alpha <= 0:
            raise DomainError(f"alpha must be a positive finite number, got {self.alpha!r}")
        beta = 1.0 / alpha
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "gamma", alpha * alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "kappa", beta * beta)
        object.__setattr__(self, "det_d", alpha)

    @classmethod
    def from_preset(cls, name: str) -> "EllipseLattice":
        """Build a lattice from a named preset (e, sqrt2, two_pow_quarter, golden, one)."""
        if name not in PRESETS:
            raise UsageError(f"Unknown lattice preset '{name}'. Known: {sorted(PRESETS)}")
        return cls(PRESETS[name], label=name)

    @classmethod
    def resolve(cls, value: Union[str, float]) -> "EllipseLattice":
        """Accept either a preset name or a numeric aspect ratio."""
        if isinstance(value, str):
            if value in PRESETS:
                return cls.from_preset(value)
            try:
                return cls(float(value))
            except ValueError:
                raise UsageError(f"Unknown lattice preset '{value}'. Known: {sorted(PRESETS)}")
        return cls(float(value))

    def scale(self, side: Side) -> float:
        """Spacing of the imaginary generator on the given side (α or β)."""
        return self.alpha if Side(side) is Side.PRIMAL else self.beta

    def coefficient(self, side: Side) -> float:
        """Coefficient of m² in the squared norm (γ or κ)."""
        return self.gamma if Side(side) is Side.PRIMAL else self.kappa

    def exact_coefficient(self, side: Side) -> Fraction:
        """Exact square of the stored generator spacing."""
        return Fraction(self.scale(side)) ** 2

    def dual(self) -> "EllipseLattice":
        """The lattice ⟨1, iβ⟩ viewed as a primal lattice."""
        return EllipseLattice(self.beta)


@dataclass(frozen=True)
class LatticeVector:
    """Integer coordinates of a lattice vector with its squared norm."""

    n: int
    m: int
    side: Side
    squared_norm: float


def squared_norm(v: Tuple[int, int], lat: EllipseLattice, side: Side = Side.PRIMAL) -> float:
    """
    Squared norm n² + m²·γ (primal) or n² + m²·κ (dual).

    Args:
        v: Integer pair (n, m)
        lat: Lattice
        side: primal or dual

    Returns:
        Squared norm as a float
    """
    n, m = int(v[0]), int(v[1])
    return float(n * n) + float(m * m) * lat.coefficient(side)


def multiplicity_r(v: Union[LatticeVector, Tuple[int, int]]) -> int:
    """Number of sign images of v: 1 at the origin, 2 on an axis, 4 otherwise."""
    n, m = (v.n, v.m) if isinstance(v, LatticeVector) else (int(v[0]), int(v[1]))
    if n == 0 and m == 0:
        return 1
    if n == 0 or m == 0:
        return 2
    return 4


def multiplicity_weights(n: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Vectorized multiplicity_r."""
    n = np.asarray(n)
    m = np.asarray(m)
    zeros = (n == 0).astype(np.int64) + (m == 0).astype(np.int64)
    return np.choose(zeros, [4, 2, 1])


def _exact_row_extent(r2_exact: Fraction, m: int, coef_exact: Fraction, strict: bool) -> int:
    rem = r2_exact - m * m * coef_exact
    if strict:
        if rem <= 0:
            return -1
        ceil_rem = -((-rem.numerator) // rem.denominator)
        return math.isqrt(ceil_rem - 1)
    if rem < 0:
        return -1
    return math.isqrt(rem.numerator // rem.denominator)


def row_extents(
    lat: EllipseLattice,
    side: Side,
    m: np.ndarray,
    r2: float,
    r2_exact: Optional[Fraction] = None,
    strict: bool = False,
) -> np.ndarray:
    """
    Largest n ≥ 0 with n² + m²·c ≤ r2 (or < r2 when strict), per row m.

    Rows without any admissible n get -1.

    Args:
        lat: Lattice
        side: primal or dual
        m: Row indices
        r2: Squared radius
        r2_exact: Exact squared radius used by the boundary guard
        strict: Open instead of closed ball

    Returns:
        Array of row extents (int64)
    """
    m = np.asarray(m, dtype=np.int64)
    coef = lat.coefficient(side)
    r2 = float(r2)
    if r2_exact is None:
        r2_exact = Fraction(r2)
    mm = (m * m).astype(np.float64) * coef
    rem = r2 - mm
    n = np.floor(np.sqrt(np.maximum(rem, 0.0))).astype(np.int64)

    def inside(k: np.ndarray) -> np.ndarray:
        val = k.astype(np.float64) ** 2 + mm
        return (val < r2) if strict else (val <= r2)

    n = np.where(inside(n), n, n - 1)
    n = np.where(inside(n + 1), n + 1, n)

    tol = BOUNDARY_TOLERANCE * r2
    nf = n.astype(np.float64)
    near = np.abs((nf + 1.0) ** 2 + mm - r2) <= tol
    near |= (n >= 0) & (np.abs(nf * nf + mm - r2) <= tol)
    if np.any(near):
        coef_exact = lat.exact_coefficient(side)
        for idx in np.flatnonzero(near):
            n[idx] = _exact_row_extent(r2_exact, int(m[idx]), coef_exact, strict)
    return n


def _check_budget(lat: EllipseLattice, side: Side, radius: float, max_vectors: int):
    estimate = math.pi * radius * radius / lat.scale(side) + 2.0 * radius * (1.0 + 1.0 / lat.scale(side)) + 1.0
    if estimate > max_vectors:
        raise ResourceError(
            f"Enumeration of radius {radius:g} needs about {estimate:.3g} vectors, "
            f"budget is {max_vectors:g}"
        )


def _row_range(lat: EllipseLattice, side: Side, radius: float, first_quadrant: bool) -> np.ndarray:
    m_max = int(math.floor(radius / lat.scale(side))) + 1
    start = 0 if first_quadrant else -m_max
    return np.arange(start, m_max + 1, dtype=np.int64)


def vector_arrays(
    lat: EllipseLattice,
    side: Side,
    radius: float,
    first_quadrant: bool = False,
    primitive: bool = False,
    strict: bool = False,
    max_vectors: int = DEFAULT_MAX_VECTORS,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Coordinates and squared norms of the vectors with |v| ≤ radius.

    Args:
        lat: Lattice
        side: primal or dual
        radius: Enumeration radius (≥ 0)
        first_quadrant: Keep only n, m ≥ 0
        primitive: Keep only gcd(n, m) = 1 (implies first_quadrant)
        strict: Use |v| < radius
        max_vectors: Enumeration budget

    Returns:
        Tuple (n, m, squared_norms), sorted by squared norm then m then n
    """
    side = Side(side)
    radius = float(radius)
    if radius < 0 or not math.isfinite(radius):
        raise DomainError(f"radius must be finite and non-negative, got {radius}")
    first_quadrant = first_quadrant or primitive
    _check_budget(lat, side, radius, max_vectors)

    rows = _row_range(lat, side, radius, first_quadrant)
    extents = row_extents(lat, side, rows, radius * radius, Fraction(radius) ** 2, strict)
    keep = extents >= 0
    rows, extents = rows[keep], extents[keep]

    lows = np.zeros_like(extents) if first_quadrant else -extents
    counts = extents - lows + 1
    total = int(counts.sum())
    if total > max_vectors:
        raise ResourceError(f"Enumeration needs {total} vectors, budget is {max_vectors}")

    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    n = np.arange(total, dtype=np.int64) - np.repeat(starts, counts) + np.repeat(lows, counts)
    m = np.repeat(rows, counts)
    if primitive:
        keep = np.gcd(n, m) == 1
        n, m = n[keep], m[keep]

    sq = (n * n).astype(np.float64) + (m * m).astype(np.float64) * lat.coefficient(side)
    order = np.lexsort((n, m, sq))
    return n[order], m[order], sq[order]


def enumerate_vectors(
    lat: EllipseLattice,
    side: Side,
    radius: float,
    quadrant_primitive: bool = False,
    max_vectors: int = DEFAULT_MAX_VECTORS,
) -> List[LatticeVector]:
    """
    All vectors with |v| ≤ radius, or first-quadrant primitive ones.

    Args:
        lat: Lattice
        side: primal or dual
        radius: Enumeration radius
        quadrant_primitive: Return only gcd(n, m) = 1 with n, m ≥ 0
        max_vectors: Enumeration budget

    Returns:
        List of LatticeVector sorted by squared norm
    """
    side = Side(side)
    n, m, sq = vector_arrays(lat, side, radius, primitive=quadrant_primitive, max_vectors=max_vectors)
    return [LatticeVector(int(a), int(b), side, float(q)) for a, b, q in zip(n, m, sq)]


def radial_shells(
    lat: EllipseLattice,
    side: Side,
    radius: float,
    strict: bool = False,
    max_vectors: int = DEFAULT_MAX_VECTORS,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Norms |k| of the nonzero first-quadrant vectors with their weights r(k).

    A sum of f(|k|) over all nonzero vectors in the ball equals the
    weighted sum over these shells.

    Returns:
        Tuple (norms, weights), norms ascending
    """
    n, m, sq = vector_arrays(lat, side, radius, first_quadrant=True, strict=strict, max_vectors=max_vectors)
    nonzero = sq > 0
    n, m, sq = n[nonzero], m[nonzero], sq[nonzero]
    return np.sqrt(sq), multiplicity_weights(n, m).astype(np.float64)


@dataclass(frozen=True)
class SpectrumTable:
    """
    Distinct squared norms up to a cutoff, with multiplicities and gaps.

    Entries are first-quadrant keys (|n|, |m|); two keys share an entry only
    when their norms agree exactly.
    """

    cutoff: float
    side: Side
    squared_norms: np.ndarray
    representatives: np.ndarray
    multiplicities: np.ndarray
    min_gap: float

    def __len__(self) -> int:
        return len(self.squared_norms)

    @property
    def entries(self) -> List[Tuple[float, Tuple[int, int], int]]:
        return [
            (float(q), (int(rep[0]), int(rep[1])), int(mult))
            for q, rep, mult in zip(self.squared_norms, self.representatives, self.multiplicities)
        ]

    def nearest_index(self, x: float) -> int:
        """Index of the entry closest to x; ties go to the smaller norm."""
        q = self.squared_norms
        j = int(np.searchsorted(q, x, side="left"))
        if j == 0:
            return 0
        if j == len(q):
            return len(q) - 1
        return j - 1 if (x - q[j - 1]) <= (q[j] - x) else j

    def delta_at(self, x: float) -> float:
        """
        Gap function extended to the real line.

        The entry nearest to x is chosen (the smaller one at a midpoint), and
        the distance to its closest neighbouring norm is returned.
        """
        q = self.squared_norms
        if len(q) < 2:
            return math.inf
        i = self.nearest_index(x)
        gaps = []
        if i > 0:
            gaps.append(q[i] - q[i - 1])
        if i + 1 < len(q):
            gaps.append(q[i + 1] - q[i])
        return float(min(gaps))

    def total_vectors(self) -> int:
        return int(self.multiplicities.sum())

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "squared_norm": self.squared_norms,
            "n": self.representatives[:, 0],
            "m": self.representatives[:, 1],
            "multiplicity": self.multiplicities,
        })

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
        return path


def _exact_norm(n: int, m: int, coef_exact: Fraction) -> Fraction:
    return n * n + m * m * coef_exact


def norm_spectrum(
    lat: EllipseLattice,
    side: Side,
    X: float,
    max_vectors: int = DEFAULT_MAX_VECTORS,
) -> SpectrumTable:
    """
    Table of all distinct squared norms ≤ X.

    Args:
        lat: Lattice
        side: primal or dual
        X: Cutoff for the squared norm (> 0)
        max_vectors: Enumeration budget

    Returns:
        SpectrumTable
    """
    side = Side(side)
    if not X > 0:
        raise DomainError(f"spectrum cutoff must be positive, got {X}")
    radius = math.sqrt(X)
    _check_budget(lat, side, radius, max_vectors)
    rows = _row_range(lat, side, radius, first_quadrant=True)
    extents = row_extents(lat, side, rows, float(X), Fraction(X))
    keep = extents >= 0
    rows, extents = rows[keep], extents[keep]
    counts = extents + 1
    total = int(counts.sum())
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    n = np.arange(total, dtype=np.int64) - np.repeat(starts, counts)
    m = np.repeat(rows, counts)
    sq = (n * n).astype(np.float64) + (m * m).astype(np.float64) * lat.coefficient(side)
    order = np.lexsort((n, m, sq))
    n, m, sq = n[order], m[order], sq[order]
    weights = multiplicity_weights(n, m)

    # merge keys whose norms coincide exactly
    same = np.zeros(len(sq), dtype=bool)
    if len(sq) > 1:
        close = np.abs(np.diff(sq)) <= MERGE_TOLERANCE * np.maximum(sq[1:], 1.0)
        if np.any(close):
            coef_exact = lat.exact_coefficient(side)
            for i in np.flatnonzero(close):
                a = _exact_norm(int(n[i]), int(m[i]), coef_exact)
                b = _exact_norm(int(n[i + 1]), int(m[i + 1]), coef_exact)
                same[i + 1] = a == b
    starts = np.flatnonzero(~same)
    norms = sq[starts]
    multiplicities = np.add.reduceat(weights, starts) if len(starts) else weights
    representatives = np.stack([n[starts], m[starts]], axis=1)
    min_gap = float(np.min(np.diff(norms))) if len(norms) > 1 else math.inf
    return SpectrumTable(
        cutoff=float(X),
        side=side,
        squared_norms=norms,
        representatives=representatives,
        multiplicities=multiplicities.astype(np.int64),
        min_gap=min_gap,
    )


def multiplicity_violations(table: SpectrumTable) -> int:
    """Entries whose multiplicity differs from r of their representative."""
    expected = multiplicity_weights(table.representatives[:, 0], table.representatives[:, 1])
    return int(np.count_nonzero(expected != table.multiplicities))


def pair_near_count(
    lat: EllipseLattice,
    R: float,
    delta: float,
    side: Side = Side.PRIMAL,
    max_vectors: int = DEFAULT_MAX_VECTORS,
) -> int:
    """
    Count pairs (k, l) with R ≤ |k|² ≤ 2R and |k|² ≤ |l|² ≤ |k|² + δ.

    Sweeps the sorted spectrum with prefix sums of multiplicities.

    Args:
        lat: Lattice
        R: Lower end of the |k|² range (> 0)
        delta: Window width (≥ 0)
        side: primal or dual
        max_vectors: Enumeration budget

    Returns:
        Number of ordered pairs
    """
    if not R > 0:
        raise DomainError(f"R must be positive, got {R}")
    if delta < 0:
        raise DomainError(f"delta must be non-negative, got {delta}")
    table = norm_spectrum(lat, side, 2.0 * R + delta, max_vectors=max_vectors)
    q = table.squared_norms
    mult = table.multiplicities
    prefix = np.concatenate(([0], np.cumsum(mult)))
    sel = np.flatnonzero((q >= R) & (q <= 2.0 * R))
    lo = np.searchsorted(q, q[sel], side="left")
    hi = np.searchsorted(q, q[sel] + delta, side="right")
    return int(np.sum(mult[sel] * (prefix[hi] - prefix[lo])))
