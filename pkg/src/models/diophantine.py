"""
Diophantine Diagnostics

Empirical diagnostics of how well an aspect ratio can be approximated:
continued fractions with an exponent fit, the sign-product polynomial Q,
minimal nonzero signed sums of square roots of binary quadratic forms, and
minimal gaps between dual norms. Only trends are measured; no property is
ever certified.
"""

import itertools
import logging
import math
import warnings
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np
import pandas as pd
import sympy

from ..utils.errors import DomainError, ResourceError
from ..utils.precision import MPMATH_LOCK
from .lattice import DEFAULT_MAX_VECTORS, EllipseLattice, Side, norm_spectrum

logger = logging.getLogger(__name__)

MAX_CF_DEPTH = 60
FLOAT_DIGITS = 15
HIGH_PRECISION_DIGITS = 80
ZERO_TOLERANCE = 1e-12
RECHECK_BELOW = 1e-8
DEFAULT_MAX_COMBINATIONS = 50_000_000


_HIGH_PRECISION = {
    "e": lambda: mpmath.e,
    "sqrt2": lambda: mpmath.sqrt(2),
    "two_pow_quarter": lambda: mpmath.root(2, 4),
    "golden": lambda: mpmath.phi,
    "one": lambda: mpmath.mpf(1),
}


@dataclass
class DiophantineReport:
    """
    Continued-fraction data of η with an empirical approximation exponent.

    Attributes:
        eta: The number (as a double)
        depth: Number of partial quotients actually computed
        partial_quotients: a_0, a_1, ...
        convergents: (p_k, q_k) pairs
        errors: |η − p_k/q_k|
        exponent_estimate: K fitted from log|η − p/q| ≈ −K log q
        K1_estimate: Decay exponent of minimal two-root combinations against the bound
        K2_estimate: Decay exponent of minimal three-root combinations against the bound
        height: Height of the integer polynomial Q in three variables
    """

    eta: float
    depth: int
    partial_quotients: List[int]
    convergents: List[Tuple[int, int]] = field(default_factory=list)
    errors: List[float] = field(default_factory=list)
    exponent_estimate: float = math.nan
    K1_estimate: Optional[float] = None
    K2_estimate: Optional[float] = None
    height: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["convergents"] = [list(c) for c in self.convergents]
        return data


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log y against log x."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    keep = (xs > 0) & (ys > 0) & np.isfinite(ys)
    if np.count_nonzero(keep) < 2:
        return math.nan
    return float(np.polyfit(np.log(xs[keep]), np.log(ys[keep]), 1)[0])


def _as_mpf(eta: Union[float, str, "mpmath.mpf"]) -> Tuple["mpmath.mpf", int]:
    """High-precision value of η and the number of trustworthy digits."""
    if isinstance(eta, str):
        if eta not in _HIGH_PRECISION:
            raise DomainError(f"Unknown constant '{eta}'")
        return _HIGH_PRECISION[eta](), HIGH_PRECISION_DIGITS - 5
    if isinstance(eta, mpmath.mpf):
        return eta, mpmath.mp.dps - 5
    return mpmath.mpf(float(eta)), FLOAT_DIGITS


def high_precision_power(name: str, power: int = 2) -> "mpmath.mpf":
    """A named constant raised to an integer power at full working precision."""
    if name not in _HIGH_PRECISION:
        raise DomainError(f"Unknown constant '{name}'")
    with MPMATH_LOCK, mpmath.workdps(HIGH_PRECISION_DIGITS):
        return _HIGH_PRECISION[name]() ** power


def cf_expansion(eta: Union[float, str, "mpmath.mpf"], depth: int) -> DiophantineReport:
    """
    Continued-fraction expansion with an approximation-exponent fit.

    Quotients are produced while the current convergent is still resolved by
    the precision of η; beyond that the expansion is truncated with a
    warning.

    Args:
        eta: Positive number, or a preset name for a high-precision constant
        depth: Requested number of partial quotients (≤ 60)

    Returns:
        DiophantineReport
    """
    if not 1 <= int(depth) <= MAX_CF_DEPTH:
        raise DomainError(f"depth must be in 1..{MAX_CF_DEPTH}, got {depth}")
    with MPMATH_LOCK, mpmath.workdps(HIGH_PRECISION_DIGITS):
        value, digits = _as_mpf(eta)
        if not value > 0:
            raise DomainError(f"eta must be positive, got {eta}")
        resolution = mpmath.mpf(10) ** (-digits) * max(value, 1)

        quotients: List[int] = []
        convergents: List[Tuple[int, int]] = []
        errors: List[float] = []
        x = value
        # (p, q) hold p_{k-1}, q_{k-1}; (p_prev, q_prev) hold p_{k-2}, q_{k-2}
        p, p_prev = 1, 0
        q, q_prev = 0, 1
        while len(quotients) < depth:
            a = int(mpmath.floor(x))
            quotients.append(a)
            p, p_prev = a * p + p_prev, p
            q, q_prev = a * q + q_prev, q
            convergents.append((p, q))
            err = abs(value - mpmath.mpf(p) / q)
            errors.append(float(err))
            frac = x - a
            if frac == 0:
                break
            # the next quotient is only meaningful while 1/q² stays above the resolution
            if mpmath.mpf(1) / (q * q) <= 1000 * resolution:
                break
            x = 1 / frac

    if len(quotients) < depth and errors[-1] != 0.0:
        message = f"continued fraction of {float(value):.17g} truncated at depth {len(quotients)} of {depth} (precision limit)"
        logger.warning(message)
        warnings.warn(message, RuntimeWarning, stacklevel=2)

    qs = [c[1] for c in convergents[1:]]
    es = errors[1:len(qs) + 1]
    slope = loglog_slope(qs, es)
    return DiophantineReport(
        eta=float(value),
        depth=len(quotients),
        partial_quotients=quotients,
        convergents=convergents,
        errors=errors,
        exponent_estimate=-slope if math.isfinite(slope) else math.nan,
    )


def convergent_bound_holds(report: DiophantineReport) -> bool:
    """Check |η − p/q| < 1/q² for every convergent."""
    return all(err < 1.0 / (q * q) for (_, q), err in zip(report.convergents, report.errors))


def _check_order(m: int):
    if not 2 <= m <= 4:
        raise DomainError(f"number of square roots must be in 2..4, got {m}")


def sign_product_Q(z: Sequence[float]) -> float:
    """
    Q(z) = Π_{δ ∈ {±1}^m} Σ_j δ_j √z_j, evaluated numerically.

    Args:
        z: m non-negative reals, 2 ≤ m ≤ 4

    Returns:
        Q(z)
    """
    z = np.asarray(z, dtype=np.float64)
    _check_order(len(z))
    if np.any(z < 0):
        raise DomainError("sign_product_Q needs non-negative arguments")
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=len(z))))
    return float(np.prod(signs @ np.sqrt(z)))


@lru_cache(maxsize=4)
def symbolic_sign_product(m: int) -> sympy.Poly:
    """
    Expand Q as a polynomial in z_1..z_m.

    Every exponent of the expansion in the square roots is even, so the
    result is a polynomial in the z_j; its coefficients are checked to be
    integers and its degree to be 2^{m−1}.

    Args:
        m: Number of arguments (2 or 3)

    Returns:
        sympy Poly in z_1..z_m
    """
    if not 2 <= m <= 3:
        raise DomainError(f"symbolic expansion is provided for m in 2..3, got {m}")
    x = sympy.symbols(f"x1:{m + 1}")
    z = sympy.symbols(f"z1:{m + 1}")
    product = sympy.Integer(1)
    for signs in itertools.product((1, -1), repeat=m):
        product *= sum(s * xi for s, xi in zip(signs, x))
    expanded = sympy.Poly(sympy.expand(product), *x)
    terms = {}
    for exponents, coefficient in expanded.terms():
        if any(e % 2 for e in exponents):
            raise ArithmeticError(f"odd exponent {exponents} in sign product")
        if not coefficient.is_integer:
            raise ArithmeticError(f"non-integer coefficient {coefficient} in sign product")
        terms[tuple(e // 2 for e in exponents)] = int(coefficient)
    poly = sympy.Poly.from_dict(terms, *z)
    if poly.total_degree() != 2 ** (m - 1):
        raise ArithmeticError(f"sign product has degree {poly.total_degree()}, expected {2 ** (m - 1)}")
    return poly


def sign_product_report(z: Sequence[float]) -> Dict[str, Any]:
    """Numeric Q with the symbolic cross-check (m ≤ 3) and the height of Q."""
    numeric = sign_product_Q(z)
    report: Dict[str, Any] = {"z": [float(v) for v in z], "numeric": numeric}
    if len(z) <= 3:
        poly = symbolic_sign_product(len(z))
        symbolic = float(poly.eval(tuple(sympy.Rational(float(v)) for v in z)))
        report.update({
            "symbolic": symbolic,
            "relative_error": abs(numeric - symbolic) / max(abs(symbolic), 1e-300),
            "height": int(max(abs(int(c)) for c in poly.coeffs())),
            "degree": int(poly.total_degree()),
        })
    return report


@dataclass(frozen=True)
class CombinationResult:
    """Minimal nonzero |Σ ε_j √(a_j² + η b_j²)| with an attaining tuple of (a, b, ε)."""

    min_value: float
    attaining: Tuple[Tuple[int, int, int], ...]
    rechecked: bool = False


def _form_values(eta: float, Mmax: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    b_max = int(math.floor(math.sqrt(Mmax / eta)))
    a_max = int(math.floor(math.sqrt(Mmax)))
    a, b = np.meshgrid(np.arange(a_max + 1), np.arange(b_max + 1), indexing="ij")
    a, b = a.ravel(), b.ravel()
    z = a.astype(np.float64) ** 2 + eta * b.astype(np.float64) ** 2
    keep = (z > 0) & (z <= Mmax)
    a, b, z = a[keep], b[keep], z[keep]
    order = np.lexsort((b, a, z))
    return a[order], b[order], np.sqrt(z[order])


def _multisets(n: int, k: int) -> np.ndarray:
    """All index tuples i_1 ≤ ... ≤ i_k over range(n), one per row."""
    combos = np.arange(n, dtype=np.int64)[:, None]
    for _ in range(k - 1):
        last = combos[:, -1]
        counts = n - last
        total = int(counts.sum())
        starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
        appended = np.arange(total, dtype=np.int64) - np.repeat(starts, counts) + np.repeat(last, counts)
        combos = np.concatenate((np.repeat(combos, counts, axis=0), appended[:, None]), axis=1)
    return combos


def _recheck(eta: float, terms: Sequence[Tuple[int, int, int]]) -> float:
    with MPMATH_LOCK, mpmath.workdps(40):
        e = mpmath.mpf(eta)
        total = mpmath.fsum(s * mpmath.sqrt(a * a + e * b * b) for a, b, s in terms)
        return float(abs(total))


def min_sqrt_combination(
    eta: float,
    m: int,
    Mmax: float,
    max_combinations: int = DEFAULT_MAX_COMBINATIONS,
) -> CombinationResult:
    """
    Exhaustive minimum of |Σ_{j≤m} ε_j √z_j| over z_j = a_j² + η b_j² ≤ Mmax.

    Positive and negative parts are enumerated as multisets of square roots
    and matched by sorted search. Combinations within 1e-12 of zero count as
    exact cancellations and are excluded; candidates below 1e-8 are
    recomputed in extended precision.

    Args:
        eta: Form coefficient η > 0
        m: Number of square roots (2..4)
        Mmax: Bound on each z_j
        max_combinations: Budget on enumerated multisets

    Returns:
        CombinationResult
    """
    _check_order(m)
    if not eta > 0 or not Mmax > 0:
        raise DomainError("eta and Mmax must be positive")
    a, b, v = _form_values(float(eta), float(Mmax))
    n = len(v)
    if n == 0:
        raise DomainError(f"no nonzero form values up to {Mmax}")

    best = (math.inf, None, None, 0)
    for p in range(m, (m + 1) // 2 - 1, -1):
        q = m - p
        size = math.comb(n + p - 1, p)
        if size > max_combinations:
            raise ResourceError(f"{size} multisets of size {p} exceed the budget {max_combinations}")
        pos = _multisets(n, p)
        pos_sums = v[pos].sum(axis=1)
        if q == 0:
            neg = np.zeros((1, 0), dtype=np.int64)
            neg_sums = np.zeros(1)
        else:
            neg = _multisets(n, q)
            neg_sums = v[neg].sum(axis=1)
        order = np.argsort(neg_sums, kind="stable")
        neg, neg_sums = neg[order], neg_sums[order]

        j = np.searchsorted(neg_sums, pos_sums)
        for offset in (-2, -1, 0, 1):
            c = np.clip(j + offset, 0, len(neg_sums) - 1)
            diff = np.abs(pos_sums - neg_sums[c])
            diff[diff <= ZERO_TOLERANCE] = np.inf
            i = int(np.argmin(diff))
            if diff[i] < best[0]:
                best = (float(diff[i]), pos[i], neg[c[i]], p)

    value, pos_idx, neg_idx, _ = best
    terms = tuple(
        [(int(a[i]), int(b[i]), 1) for i in pos_idx] + [(int(a[i]), int(b[i]), -1) for i in neg_idx]
    )
    rechecked = False
    if value < RECHECK_BELOW:
        value = _recheck(eta, terms)
        rechecked = True
        logger.info(f"Extended-precision recheck of minimal combination: {value:.3e}")
    return CombinationResult(min_value=value, attaining=terms, rechecked=rechecked)


def pair_gap_minimum(eta: float, Mmax: float) -> float:
    """Smallest nonzero difference of distinct √(a² + η b²) ≤ √Mmax."""
    _, _, v = _form_values(float(eta), float(Mmax))
    gaps = np.diff(v)
    gaps = gaps[gaps > ZERO_TOLERANCE]
    return float(gaps.min()) if len(gaps) else math.inf


def min_dual_norm_gap(lat: EllipseLattice, M: float, max_vectors: int = DEFAULT_MAX_VECTORS) -> float:
    """
    Minimal gap between distinct nonzero dual norms |k| ≤ √M.

    Args:
        lat: Lattice
        M: Squared-norm cutoff
        max_vectors: Enumeration budget

    Returns:
        min ||k| − |k′||, or inf when fewer than two norms exist
    """
    table = norm_spectrum(lat, Side.DUAL, M, max_vectors=max_vectors)
    norms = np.sqrt(table.squared_norms[table.squared_norms > 0])
    if len(norms) < 2:
        return math.inf
    return float(np.min(np.diff(norms)))


def dual_gap_scan(lat: EllipseLattice, Ms: Sequence[float], max_vectors: int = DEFAULT_MAX_VECTORS) -> Tuple[pd.DataFrame, float]:
    """Minimal dual gaps over several cutoffs with the log-log slope."""
    gaps = [min_dual_norm_gap(lat, M, max_vectors) for M in Ms]
    frame = pd.DataFrame({"M": [float(M) for M in Ms], "min_gap": gaps})
    return frame, loglog_slope(Ms, gaps)


def combination_scan(
    eta: float,
    m: int,
    Mmaxs: Sequence[float],
    max_combinations: int = DEFAULT_MAX_COMBINATIONS,
) -> Tuple[pd.DataFrame, float]:
    """Minimal combinations over several bounds with the log-log slope."""
    values = [min_sqrt_combination(eta, m, Mmax, max_combinations).min_value for Mmax in Mmaxs]
    frame = pd.DataFrame({"m": [m] * len(Mmaxs), "Mmax": [float(x) for x in Mmaxs], "min_value": values})
    return frame, loglog_slope(Mmaxs, values)
