"""
Epstein Zeta Function and the Truncated Sharp-Count Formula

Z_γ(s) = (1/4) Σ_{(n,m) ≠ 0} (n² + γm²)^{−s} for the lattice ⟨1, i√γ⟩.

Two evaluators are provided:
- direct: row sums in mpmath for Re s > 1, with the far rows replaced by
  their Poisson main term (exponentially small error)
- integral: the theta-integral continuation, valid for all s except 0 and 1

The module also evaluates the hard-cutoff dual sum approximating the sharp
count N(t), with boundary points weighted by one half.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, NamedTuple, Union

import mpmath
import numpy as np
import pandas as pd
from scipy import integrate, special

from ..utils.errors import DomainError
from ..utils.precision import MPMATH_LOCK, compensated_sum, reduced_phase
from .counting import count_jump_convention
from .lattice import DEFAULT_MAX_VECTORS, EllipseLattice, Side, radial_shells
from .smoothing import oscillatory_sum

logger = logging.getLogger(__name__)

# dropped theta terms satisfy e^{−πn²y} < THETA_CUTOFF
THETA_CUTOFF = 1e-17
# quadrature stops where the integrand bound falls below e^{−TAIL_EXPONENT}
TAIL_EXPONENT = 40.0
DIRECT_DIGITS = 25
# rows with √γ·m beyond this are replaced by their Poisson main term
DIRECT_ROW_SCALE = 6.0


class ZetaMethod(str, Enum):
    DIRECT = "direct"
    INTEGRAL = "integral"


@dataclass(frozen=True)
class ZetaValue:
    """
    One evaluation of Z_γ(s).

    Attributes:
        gamma: Squared aspect ratio γ > 0
        s: Argument
        value: Z_γ(s)
        method: Evaluator used
    """

    gamma: float
    s: complex
    value: complex
    method: ZetaMethod

    def to_row(self) -> dict:
        return {
            "gamma": self.gamma,
            "re_s": self.s.real,
            "im_s": self.s.imag,
            "re_z": self.value.real,
            "im_z": self.value.imag,
            "method": self.method.value,
        }


def _theta_tail(y: float) -> float:
    """θ(y) − 1 = 2 Σ_{n≥1} e^{−πn²y}."""
    n_max = int(math.ceil(math.sqrt(-math.log(THETA_CUTOFF) / (math.pi * y))))
    n = np.arange(1, n_max + 1, dtype=np.float64)
    return 2.0 * float(np.exp(-math.pi * n * n * y).sum())


def theta_psi(gamma: float, x: float) -> float:
    """
    ψ_γ(x) = (1/4) Σ_{k ≠ 0} e^{−π|k|²x} = (θ(x)θ(γx) − 1)/4.

    Evaluated as (a + b + ab)/4 with a = θ(x) − 1, b = θ(γx) − 1, so small
    values keep their relative precision.
    """
    a = _theta_tail(x)
    b = _theta_tail(gamma * x)
    return 0.25 * (a + b + a * b)


def _cutoff(gamma: float, exponent_real: float) -> float:
    decay = math.pi * min(1.0, gamma)
    return 1.0 + (TAIL_EXPONENT + 3.0 * abs(exponent_real)) / decay


def _mellin_tail(gamma: float, power: complex) -> complex:
    """∫₁^∞ x^{power} ψ_γ(x) dx by adaptive quadrature on [1, X_cut]."""
    upper = _cutoff(gamma, power.real)

    def integrand(x: float, part) -> float:
        return part(x ** power * theta_psi(gamma, x))

    options = dict(epsabs=1e-15, epsrel=1e-13, limit=200)
    re, _ = integrate.quad(integrand, 1.0, upper, args=(lambda z: z.real,), **options)
    im, _ = integrate.quad(integrand, 1.0, upper, args=(lambda z: z.imag,), **options)
    return complex(re, im)


def _check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not (math.isfinite(gamma) and gamma > 0):
        raise DomainError(f"gamma must be positive, got {gamma}")
    return gamma


def _epstein_integral(gamma: float, s: complex) -> complex:
    if s == 0 or s == 1:
        raise DomainError(f"integral representation is singular at s = {s}")
    root = math.sqrt(gamma)
    bracket = (
        _mellin_tail(gamma, s - 1.0)
        + _mellin_tail(1.0 / gamma, -s) / root
        - (s - root * (s - 1.0)) / (4.0 * root * s * (1.0 - s))
    )
    return complex(np.pi ** s * special.rgamma(s) * bracket)


def _epstein_direct(gamma: float, s: complex) -> complex:
    if not s.real > 1:
        raise DomainError(f"direct summation needs Re(s) > 1, got s = {s}")
    m0 = int(math.ceil(DIRECT_ROW_SCALE / math.sqrt(gamma)))
    with MPMATH_LOCK, mpmath.workdps(DIRECT_DIGITS):
        z = mpmath.mpc(s.real, s.imag)
        g = mpmath.mpf(gamma)
        total = 2 * mpmath.zeta(2 * z)
        for m in range(1, m0 + 1):
            c = g * m * m
            row = c ** (-z) + 2 * mpmath.nsum(lambda n: (n * n + c) ** (-z), [1, mpmath.inf], method="euler-maclaurin")
            total += 2 * row
        # Σ_{n∈Z} (n² + γm²)^{−s} ≈ √π Γ(s−½)/Γ(s) (γm²)^{½−s} for the remaining rows
        main = mpmath.sqrt(mpmath.pi) * mpmath.gamma(z - 0.5) / mpmath.gamma(z) * g ** (0.5 - z)
        total += 2 * main * mpmath.zeta(2 * z - 1, m0 + 1)
        return complex(total / 4)


def epstein_eval(gamma: float, s: complex, method: Union[str, ZetaMethod] = ZetaMethod.INTEGRAL) -> ZetaValue:
    """
    Evaluate Z_γ(s).

    Args:
        gamma: Squared aspect ratio
        s: Argument; Re(s) > 1 for the direct method, s ∉ {0, 1} for the integral
        method: "direct" or "integral"

    Returns:
        ZetaValue
    """
    gamma = _check_gamma(gamma)
    s = complex(s)
    method = ZetaMethod(method)
    if method is ZetaMethod.DIRECT:
        value = _epstein_direct(gamma, s)
    else:
        value = _epstein_integral(gamma, s)
    logger.debug(f"Z_{gamma:g}({s}) = {value} [{method.value}]")
    return ZetaValue(gamma=gamma, s=s, value=value, method=method)


def chi_gamma(gamma: float, s: complex) -> complex:
    """χ_γ(s) = π^{2s−1} Γ(1−s)/Γ(s) / √γ."""
    gamma = _check_gamma(gamma)
    s = complex(s)
    return complex(np.pi ** (2.0 * s - 1.0) * special.gamma(1.0 - s) * special.rgamma(s) / math.sqrt(gamma))


def functional_equation_residual(gamma: float, s: complex) -> float:
    """|Z_γ(s) − χ_γ(s) Z_{1/γ}(1−s)| with both sides from the integral representation."""
    left = epstein_eval(gamma, s).value
    right = chi_gamma(gamma, s) * epstein_eval(1.0 / gamma, 1.0 - complex(s)).value
    return abs(left - right)


def residue_check(gamma: float, h: float = 1e-4) -> float:
    """h·Z_γ(1 + h), which tends to π/(4√γ)."""
    if not h > 0:
        raise DomainError(f"h must be positive, got {h}")
    return (h * epstein_eval(gamma, 1.0 + h).value).real


def residue_relative_error(gamma: float, h: float = 1e-4) -> float:
    exact = math.pi / (4.0 * math.sqrt(_check_gamma(gamma)))
    return abs(residue_check(gamma, h) - exact) / exact


def epstein_table(values: Iterable[ZetaValue]) -> pd.DataFrame:
    """Tabulate evaluations as gamma, re_s, im_s, re_z, im_z, method."""
    columns = ["gamma", "re_s", "im_s", "re_z", "im_z", "method"]
    return pd.DataFrame([v.to_row() for v in values], columns=columns)


def write_zeta_csv(values: Iterable[ZetaValue], path: Union[str, Path]) -> Path:
    path = Path(path)
    epstein_table(values).to_csv(path, index=False, float_format="%.17g")
    return path


class TruncatedFormula(NamedTuple):
    approx: float
    residual: float


def _truncated_terms(lat: EllipseLattice, N: float, max_vectors: int):
    if not N > 0:
        raise DomainError(f"N must be positive, got {N}")
    norms, weights = radial_shells(lat, Side.DUAL, math.sqrt(N), strict=False, max_vectors=max_vectors)
    return norms, weights / norms ** 1.5


def truncated_sharp_formula(
    lat: EllipseLattice,
    t: float,
    N: float,
    reverse: bool = False,
    max_vectors: int = DEFAULT_MAX_VECTORS,
) -> TruncatedFormula:
    """
    Hard-cutoff dual approximation of the sharp count

        N(t) ≈ (π/d)t² − (√t/(dπ)) Σ_{0 < |k| ≤ √N} cos(2πt|k| + π/4)/|k|^{3/2}.

    Args:
        lat: Lattice
        t: Radius (> 0)
        N: Cutoff; dual vectors with |k|² ≤ N contribute
        reverse: Sum the dual shells in descending order
        max_vectors: Enumeration budget

    Returns:
        TruncatedFormula(approx, residual) with residual measured against
        the count that weights the boundary circle by one half
    """
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    norms, amplitudes = _truncated_terms(lat, N, max_vectors)
    if reverse:
        norms, amplitudes = norms[::-1], amplitudes[::-1]
    t = float(t)
    if len(norms):
        phase = reduced_phase(t, 0.0, norms)
        total = float(compensated_sum(amplitudes * np.cos(2.0 * math.pi * phase + math.pi / 4.0)))
    else:
        total = 0.0
    d = lat.det_d
    approx = math.pi * t * t / d - math.sqrt(t) / (d * math.pi) * total
    return TruncatedFormula(approx=approx, residual=count_jump_convention(lat, t) - approx)


def truncated_residuals(
    lat: EllipseLattice,
    ts: np.ndarray,
    N: float,
    max_vectors: int = DEFAULT_MAX_VECTORS,
) -> np.ndarray:
    """Residuals of truncated_sharp_formula for every t in ts."""
    ts = np.asarray(ts, dtype=np.float64)
    if np.any(ts <= 0):
        raise DomainError("t must be positive")
    norms, amplitudes = _truncated_terms(lat, N, max_vectors)
    total = oscillatory_sum(ts, 0.0, norms, amplitudes, np.cos)
    d = lat.det_d
    approx = math.pi * ts * ts / d - np.sqrt(ts) / (d * math.pi) * total
    counts = np.array([count_jump_convention(lat, float(t)) for t in ts])
    return counts - approx


def rms_residual(lat: EllipseLattice, ts: np.ndarray, N: float, max_vectors: int = DEFAULT_MAX_VECTORS) -> float:
    residuals = truncated_residuals(lat, ts, N, max_vectors)
    return float(np.sqrt(np.mean(residuals ** 2)))
