"""
Ensemble Statistics for Annulus Remainders

Monte Carlo realization of the averaging operator ⟨f⟩_T = E[f(T·X)] with X
drawn from a weight window, empirical moments with jackknife errors, the
variance sum σ², principal-diagonal sums, Kolmogorov-Smirnov distances, the
sharp/smooth unsmoothing gap and the indicator-window sandwich.
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Any, Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import scipy.stats
from scipy import integrate
from tqdm import tqdm

from ..utils.errors import DomainError, UsageError
from ..utils.precision import compensated_sum
from .counting import AnnulusParams, remainder_sharp_batch
from .lattice import DEFAULT_MAX_VECTORS, EllipseLattice, Side, multiplicity_weights, vector_arrays
from .smoothing import SmoothingKernel, chunk_terms_for, damped_shells, smooth_remainder_batch

logger = logging.getLogger(__name__)

DEFAULT_CHUNK = 4096
MAX_D_SUM_ORDER = 6


class WindowKind(str, Enum):
    SMOOTH_GAUSSIAN = "smooth_gaussian"
    INDICATOR_1_2 = "indicator_1_2"
    SMOOTH_PLATEAU = "smooth_plateau"


class Which(str, Enum):
    SHARP = "sharp"
    SMOOTH = "smooth"
    BOTH = "both"


def _transition(u: np.ndarray) -> np.ndarray:
    """C∞ step: 0 for u ≤ 0, 1 for u ≥ 1, with g(u) + g(1−u) = 1."""
    u = np.asarray(u, dtype=np.float64)
    out = np.where(u >= 1.0, 1.0, 0.0)
    mid = (u > 0.0) & (u < 1.0)
    if np.any(mid):
        a = np.exp(-1.0 / u[mid])
        b = np.exp(-1.0 / (1.0 - u[mid]))
        out[mid] = a / (a + b)
    return out


@dataclass(frozen=True)
class WeightWindow:
    """
    Averaging density ω on the positive half-line.

    Attributes:
        kind: smooth_gaussian, indicator_1_2 or smooth_plateau
        center: Gaussian center
        width: Gaussian standard deviation
        lower: Left end of the plateau where a plateau window equals 1
        upper: Right end of the plateau
        ramp: Width of each smooth ramp outside the plateau
    """

    kind: WindowKind = WindowKind.SMOOTH_GAUSSIAN
    center: float = 1.5
    width: float = 0.25
    lower: float = 1.0
    upper: float = 2.0
    ramp: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "kind", WindowKind(self.kind))
        if self.kind is WindowKind.SMOOTH_GAUSSIAN and not (self.width > 0 and self.center > 0):
            raise UsageError("Gaussian window needs positive center and width")
        if self.kind is WindowKind.SMOOTH_PLATEAU and not (self.ramp > 0 and self.upper > self.lower and self.lower - self.ramp > 0):
            raise UsageError("Plateau window needs 0 < lower - ramp < lower < upper")

    @classmethod
    def upper_envelope(cls, epsilon: float) -> "WeightWindow":
        """Smooth χ+ ≥ 1_[1,2] with mass 1 + ε."""
        return cls(WindowKind.SMOOTH_PLATEAU, lower=1.0, upper=2.0, ramp=epsilon)

    @classmethod
    def lower_envelope(cls, epsilon: float) -> "WeightWindow":
        """Smooth χ− ≤ 1_[1,2] with mass 1 − ε."""
        return cls(WindowKind.SMOOTH_PLATEAU, lower=1.0 + epsilon, upper=2.0 - epsilon, ramp=epsilon)

    @property
    def support(self) -> Tuple[float, float]:
        if self.kind is WindowKind.INDICATOR_1_2:
            return 1.0, 2.0
        if self.kind is WindowKind.SMOOTH_PLATEAU:
            return self.lower - self.ramp, self.upper + self.ramp
        return 0.0, self.center + 40.0 * self.width

    def raw_mass(self) -> float:
        """Mass of the unnormalized profile."""
        if self.kind is WindowKind.INDICATOR_1_2:
            return 1.0
        if self.kind is WindowKind.SMOOTH_PLATEAU:
            return (self.upper - self.lower) + self.ramp
        return float(scipy.stats.norm.sf(0.0, loc=self.center, scale=self.width))

    def raw_profile(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.kind is WindowKind.INDICATOR_1_2:
            return ((x >= 1.0) & (x <= 2.0)).astype(np.float64)
        if self.kind is WindowKind.SMOOTH_PLATEAU:
            rise = _transition((x - (self.lower - self.ramp)) / self.ramp)
            fall = _transition(((self.upper + self.ramp) - x) / self.ramp)
            return rise * fall
        return np.where(x > 0, scipy.stats.norm.pdf(x, loc=self.center, scale=self.width), 0.0)

    def density(self, x: np.ndarray) -> np.ndarray:
        """Mass-normalized density ω(x)."""
        return self.raw_profile(x) / self.raw_mass()

    def mass(self) -> float:
        """Total mass of the density by adaptive quadrature."""
        lo, hi = self.support
        if self.kind is WindowKind.SMOOTH_GAUSSIAN:
            points = [self.center]
        elif self.kind is WindowKind.SMOOTH_PLATEAU:
            points = [self.lower, self.upper]
        else:
            points = None
        value, _ = integrate.quad(lambda x: float(self.density(x)), lo, hi, points=points, limit=200, epsabs=1e-12)
        return value

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw X ~ ω."""
        if self.kind is WindowKind.INDICATOR_1_2:
            return rng.uniform(1.0, 2.0, size)
        if self.kind is WindowKind.SMOOTH_GAUSSIAN:
            x = rng.normal(self.center, self.width, size)
            bad = x <= 0
            while np.any(bad):
                x[bad] = rng.normal(self.center, self.width, int(bad.sum()))
                bad = x <= 0
            return x
        lo, hi = self.support
        out = np.empty(0)
        while len(out) < size:
            x = rng.uniform(lo, hi, 2 * (size - len(out)) + 16)
            accept = rng.uniform(0.0, 1.0, len(x)) < self.raw_profile(x)
            out = np.concatenate((out, x[accept]))
        return out[:size]


@dataclass
class SampleEnsemble:
    """
    Radii t = T·X with the remainders evaluated at them.

    Unrequested remainders are stored as NaN.
    """

    params: AnnulusParams
    window: WeightWindow
    seed: int
    which: Which
    t: np.ndarray
    s_sharp: np.ndarray
    s_smooth: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    @property
    def samples(self):
        return list(zip(self.t.tolist(), self.s_sharp.tolist(), self.s_smooth.tolist()))

    def values(self, which: Union[str, Which] = Which.SMOOTH) -> np.ndarray:
        which = Which(which)
        if which is Which.BOTH:
            raise UsageError("values() needs a single remainder kind")
        data = self.s_sharp if which is Which.SHARP else self.s_smooth
        if len(data) and np.isnan(data[0]):
            raise UsageError(f"ensemble was sampled without the {which.value} remainder")
        return data

    def average(self, fn: Callable[[np.ndarray], np.ndarray]) -> Tuple[float, float]:
        """Estimate ⟨fn(t)⟩_T with its jackknife standard error."""
        return mean_with_stderr(np.asarray(fn(self.t), dtype=np.float64) * np.ones(len(self.t)))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.t, "S_sharp": self.s_sharp, "S_smooth": self.s_smooth})


def jackknife_stderr(values: np.ndarray) -> float:
    """Delete-one jackknife standard error of the sample mean."""
    values = np.asarray(values, dtype=np.float64)
    n = len(values)
    if n < 2:
        return 0.0
    loo = (values.sum() - values) / (n - 1)
    return float(math.sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2)))


def mean_with_stderr(values: np.ndarray) -> Tuple[float, float]:
    values = np.asarray(values, dtype=np.float64)
    if len(values) == 0:
        raise DomainError("empty sample")
    return float(values.mean()), jackknife_stderr(values)


def sample_ensemble(
    lat: EllipseLattice,
    params: AnnulusParams,
    window: WeightWindow,
    n_samples: int,
    seed: int,
    which: Union[str, Which] = Which.SMOOTH,
    kernel: Optional[SmoothingKernel] = None,
    threads: Optional[int] = None,
    chunk_size: int = DEFAULT_CHUNK,
    progress: bool = False,
    on_chunk: Optional[Callable[[int], None]] = None,
    max_vectors: int = DEFAULT_MAX_VECTORS,
) -> SampleEnsemble:
    """
    Draw radii from the window and evaluate the requested remainders.

    Chunk i of the sample uses the i-th child of SeedSequence(seed), so the
    result does not depend on the number of worker threads.

    Args:
        lat: Lattice
        params: Annulus scales
        window: Weight window
        n_samples: Number of radii (≥ 1)
        seed: Root seed
        which: sharp, smooth or both
        kernel: Smoothing kernel (required for smooth remainders)
        threads: Worker threads (defaults to the CPU count)
        chunk_size: Samples per RNG stream
        progress: Show a progress bar
        on_chunk: Callback receiving the size of each finished chunk
        max_vectors: Enumeration budget

    Returns:
        SampleEnsemble
    """
    which = Which(which)
    if int(n_samples) < 1:
        raise DomainError(f"n_samples must be at least 1, got {n_samples}")
    n_samples = int(n_samples)
    need_sharp = which in (Which.SHARP, Which.BOTH)
    need_smooth = which in (Which.SMOOTH, Which.BOTH)
    if need_smooth:
        if kernel is None:
            raise UsageError("smooth remainders need a kernel")
        damped_shells(lat, kernel, params.M, max_vectors=max_vectors)

    workers = max(1, int(threads or os.cpu_count() or 1))
    chunk_terms = chunk_terms_for(workers)
    n_chunks = -(-n_samples // chunk_size)
    streams = np.random.SeedSequence(int(seed)).spawn(n_chunks)

    def run_chunk(index: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        size = min(chunk_size, n_samples - index * chunk_size)
        rng = np.random.default_rng(streams[index])
        t = params.T * window.sample(rng, size)
        sharp = remainder_sharp_batch(lat, t, params.rho) if need_sharp else np.full(size, np.nan)
        smooth = (
            smooth_remainder_batch(
                lat, kernel, params.M, params.L, t, max_vectors=max_vectors, chunk_terms=chunk_terms,
            )
            if need_smooth else np.full(size, np.nan)
        )
        if on_chunk is not None:
            on_chunk(size)
        return t, sharp, smooth

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(tqdm(
            pool.map(run_chunk, range(n_chunks)),
            total=n_chunks,
            disable=not progress,
            desc=f"{which.value} ensemble",
        ))

    return SampleEnsemble(
        params=params,
        window=window,
        seed=int(seed),
        which=which,
        t=np.concatenate([r[0] for r in results]),
        s_sharp=np.concatenate([r[1] for r in results]),
        s_smooth=np.concatenate([r[2] for r in results]),
    )


@dataclass(frozen=True)
class MomentReport:
    """Empirical normalized moment against its Gaussian value."""

    order: int
    empirical: float
    stderr: float
    gaussian_target: float
    normalization: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def gaussian_target(m: int) -> float:
    """E[Z^m] for a standard normal Z: 0 for odd m, m!/(2^{m/2}(m/2)!) for even m."""
    if m % 2:
        return 0.0
    return math.factorial(m) / (2 ** (m // 2) * math.factorial(m // 2))


def _sample_values(ens: Union[SampleEnsemble, np.ndarray], which: Union[str, Which]) -> np.ndarray:
    if isinstance(ens, SampleEnsemble):
        return ens.values(which)
    return np.asarray(ens, dtype=np.float64)


def empirical_moment(
    ens: Union[SampleEnsemble, np.ndarray],
    m: int,
    sigma: float,
    which: Union[str, Which] = Which.SMOOTH,
) -> MomentReport:
    """
    Mean of (S/σ)^m with its jackknife standard error.

    Args:
        ens: Ensemble (or a plain array of remainders)
        m: Moment order (≥ 1)
        sigma: Normalization (> 0)
        which: Remainder kind taken from an ensemble

    Returns:
        MomentReport
    """
    if m < 1:
        raise DomainError(f"moment order must be at least 1, got {m}")
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    values = _sample_values(ens, which)
    if len(values) == 0:
        raise DomainError("empty ensemble")
    mean, stderr = mean_with_stderr((values / sigma) ** m)
    return MomentReport(order=m, empirical=mean, stderr=stderr, gaussian_target=gaussian_target(m), normalization=float(sigma))


def asymptotic_sigma2(lat: EllipseLattice, L: float) -> float:
    """Leading-order variance 8π/(dL)."""
    return 8.0 * math.pi / (lat.det_d * L)


def theoretical_sigma2(
    lat: EllipseLattice,
    kernel: SmoothingKernel,
    L: float,
    M: float,
    max_vectors: int = DEFAULT_MAX_VECTORS,
) -> float:
    """
    Variance sum σ² = (2/(d²π²)) Σ_{k≠0} r(k) sin²(π|k|/L) ψ̂²(|k|/√M) / |k|³.

    Args:
        lat: Lattice
        kernel: Smoothing kernel
        L: Inverse annulus width
        M: Smoothness parameter
        max_vectors: Enumeration budget

    Returns:
        σ²
    """
    if not L > 0:
        raise DomainError(f"L must be positive, got {L}")
    norms, damped = damped_shells(lat, kernel, M, max_vectors=max_vectors)
    if len(norms) == 0:
        return 0.0
    # damped = r(k)·ψ̂ over first-quadrant keys; each key stands for r(k) vectors
    terms = damped ** 2 * np.sin(math.pi * norms / L) ** 2 / norms ** 3
    return float(2.0 / (lat.det_d ** 2 * math.pi ** 2) * compensated_sum(terms))


def sigma2_ratio_trend(
    lat: EllipseLattice,
    kernel: SmoothingKernel,
    L_values: Sequence[float],
    max_vectors: int = DEFAULT_MAX_VECTORS,
) -> Dict[float, float]:
    """
    Ratios σ²/(8π/(dL)) at M = L³ for each L.

    The kernel cuts the variance sum off at |k| ≈ √M = L^{3/2}, which leaves a
    finite-L deficit that shrinks as L grows.
    """
    return {
        float(L): theoretical_sigma2(lat, kernel, float(L), float(L) ** 3, max_vectors) / asymptotic_sigma2(lat, float(L))
        for L in L_values
    }


def resolve_sigma(
    lat: EllipseLattice,
    kernel: SmoothingKernel,
    L: float,
    M: float,
    mode: str = "asymptotic",
    max_vectors: int = DEFAULT_MAX_VECTORS,
) -> float:
    """σ for normalization: asymptotic 8π/(dL) or the full variance sum."""
    if mode == "asymptotic":
        return math.sqrt(asymptotic_sigma2(lat, L))
    if mode == "theoretical":
        return math.sqrt(theoretical_sigma2(lat, kernel, L, M, max_vectors))
    raise UsageError(f"Unknown sigma mode '{mode}'")


def diagonal_D_sum(
    lat: EllipseLattice,
    kernel: SmoothingKernel,
    L: float,
    M: float,
    S_size: int,
    sigma: float,
    kernel_reading: str = "scaled",
    max_vectors: int = DEFAULT_MAX_VECTORS,
) -> float:
    """
    Normalized principal-diagonal sum σ^{−|S|}·|Σ′_n D_n(S)|.

    For each first-quadrant primitive dual vector n the signed frequencies
    s = ε·f (1 ≤ f, f|n| < √M) carry

        h(s) = (−iε / (dπ f^{3/2})) sin(πf|n|/L) ψ̂(·) e^{iπε/4},

    and the sum over tuples with Σ ε_j f_j = 0 is the zero coefficient of the
    |S|-fold self-convolution of h, taken exactly by zero-padded FFT. Each
    direction is weighted by r(n)^{|S|} / |n|^{3|S|/2}.

    Args:
        lat: Lattice
        kernel: Smoothing kernel
        L: Inverse annulus width
        M: Smoothness parameter
        S_size: Number of frequencies |S| in 1..6
        sigma: Normalization
        kernel_reading: "scaled" for ψ̂(f|n|/√M), "literal" for ψ̂(|n|/√M)
        max_vectors: Enumeration budget

    Returns:
        Normalized diagonal sum
    """
    if not 1 <= int(S_size) <= MAX_D_SUM_ORDER:
        raise DomainError(f"S_size must be in 1..{MAX_D_SUM_ORDER}, got {S_size}")
    if kernel_reading not in ("scaled", "literal"):
        raise UsageError(f"Unknown kernel reading '{kernel_reading}'")
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    k = int(S_size)
    root_m = math.sqrt(M)
    n, m, sq = vector_arrays(lat, Side.DUAL, root_m, primitive=True, strict=True, max_vectors=max_vectors)
    if len(sq) == 0 or k == 1:
        return 0.0
    norms = np.sqrt(sq)
    r = multiplicity_weights(n, m).astype(np.float64)
    f_max = np.floor(root_m / norms).astype(np.int64)
    f_max = np.where(f_max * norms >= root_m, f_max - 1, f_max)
    d = lat.det_d

    total = 0.0 + 0.0j
    for F in np.unique(f_max):
        if F < 1:
            continue
        idx = np.flatnonzero(f_max == F)
        nn = norms[idx][:, None]
        s = np.arange(-F, F + 1)
        f = np.abs(s).astype(np.float64)
        eps = np.sign(s).astype(np.float64)
        with np.errstate(divide="ignore", invalid="ignore"):
            arg = (f[None, :] * nn if kernel_reading == "scaled" else np.broadcast_to(nn, (len(idx), len(s)))) / root_m
            h = (
                (-1j * eps[None, :] / (d * math.pi * f[None, :] ** 1.5))
                * np.sin(math.pi * f[None, :] * nn / L)
                * kernel(arg)
                * np.exp(1j * math.pi * eps[None, :] / 4.0)
            )
        h[:, F] = 0.0
        size = 1 << int(math.ceil(math.log2(2 * k * F + 1)))
        spectrum = np.fft.fft(h, n=size, axis=1) ** k
        zero_sum = np.fft.ifft(spectrum, axis=1)[:, k * F]
        weights = r[idx] ** k / norms[idx] ** (1.5 * k)
        total += np.sum(weights * zero_sum)
    return float(abs(total) / sigma ** k)


def ks_distance(
    ens: Union[SampleEnsemble, np.ndarray],
    sigma: float,
    which: Union[str, Which] = Which.SMOOTH,
) -> float:
    """
    Kolmogorov-Smirnov distance between S/σ and the standard normal.

    Args:
        ens: Ensemble (or a plain array of remainders)
        sigma: Normalization
        which: Remainder kind taken from an ensemble

    Returns:
        Sup-distance of the CDFs
    """
    values = _sample_values(ens, which)
    if len(values) == 0:
        raise DomainError("empty ensemble")
    if len(values) < 100:
        raise DomainError(f"KS distance needs at least 100 samples, got {len(values)}")
    return float(scipy.stats.kstest(values / sigma, "norm").statistic)


def mean_squared_difference(a: np.ndarray, b: np.ndarray) -> Tuple[float, float]:
    """Mean of (a − b)² with its jackknife standard error."""
    return mean_with_stderr((np.asarray(a) - np.asarray(b)) ** 2)


def unsmoothing_gap(
    lat: EllipseLattice,
    kernel: SmoothingKernel,
    params: AnnulusParams,
    window: WeightWindow,
    n_samples: int,
    seed: int,
    threads: Optional[int] = None,
    return_stderr: bool = False,
    max_vectors: int = DEFAULT_MAX_VECTORS,
) -> Union[float, Tuple[float, float]]:
    """
    Monte Carlo estimate of ⟨|S − S̃|²⟩_T.

    Args:
        lat: Lattice
        kernel: Smoothing kernel
        params: Annulus scales (ρ = 1/L)
        window: Weight window
        n_samples: Number of radii
        seed: Root seed
        threads: Worker threads
        return_stderr: Also return the standard error
        max_vectors: Enumeration budget

    Returns:
        Mean squared difference (and its standard error)
    """
    ens = sample_ensemble(
        lat, params, window, n_samples, seed, Which.BOTH,
        kernel=kernel, threads=threads, max_vectors=max_vectors,
    )
    gap, stderr = mean_squared_difference(ens.s_sharp, ens.s_smooth)
    return (gap, stderr) if return_stderr else gap


def window_sandwich(
    lat: EllipseLattice,
    kernel: SmoothingKernel,
    params: AnnulusParams,
    sigma: float,
    interval: Tuple[float, float] = (-1.0, 1.0),
    n_samples: int = 20000,
    seed: int = 0,
    epsilon: float = 0.05,
    threads: Optional[int] = None,
    max_vectors: int = DEFAULT_MAX_VECTORS,
) -> Dict[str, Any]:
    """
    Compare P(S̃/σ ∈ A) under the indicator window with smooth envelopes.

    χ± have ramps of width ε, so their masses are 1 ± ε and
    (1−ε)·P_{ω−}(A) ≤ P_{1[1,2]}(A) ≤ (1+ε)·P_{ω+}(A) holds exactly in
    expectation. The check allows three combined standard errors.

    Returns:
        Dictionary with the three probabilities, their standard errors and
        the pass flag
    """
    a, b = interval
    child_seeds = np.random.SeedSequence(int(seed)).generate_state(3)
    windows = {
        "indicator": WeightWindow(WindowKind.INDICATOR_1_2),
        "lower": WeightWindow.lower_envelope(epsilon),
        "upper": WeightWindow.upper_envelope(epsilon),
    }
    probabilities = {}
    errors = {}
    for (name, window), child in zip(windows.items(), child_seeds):
        ens = sample_ensemble(
            lat, params, window, n_samples, int(child), Which.SMOOTH,
            kernel=kernel, threads=threads, max_vectors=max_vectors,
        )
        z = ens.s_smooth / sigma
        probabilities[name], errors[name] = mean_with_stderr(((z >= a) & (z <= b)).astype(np.float64))

    lower_bound = (1.0 - epsilon) * probabilities["lower"]
    upper_bound = (1.0 + epsilon) * probabilities["upper"]
    slack_lo = 3.0 * math.hypot(errors["indicator"], (1.0 - epsilon) * errors["lower"])
    slack_hi = 3.0 * math.hypot(errors["indicator"], (1.0 + epsilon) * errors["upper"])
    p = probabilities["indicator"]
    return {
        "interval": [a, b],
        "epsilon": epsilon,
        "p_indicator": p,
        "p_lower": probabilities["lower"],
        "p_upper": probabilities["upper"],
        "stderr": errors,
        "lower_bound": lower_bound,
        "upper_bound": upper_bound,
        "passed": bool(lower_bound - slack_lo <= p <= upper_bound + slack_hi),
    }
