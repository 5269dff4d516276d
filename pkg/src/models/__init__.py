"""
Numerical Models for Lattice Points in Elliptic Annuli

- lattice: rectangular lattices, enumeration and norm spectra
- counting: exact counts and the annulus remainder
- smoothing: the compactly supported kernel and smoothed dual sums
- statistics: weighted ensembles, moments, variance and distribution checks
- diophantine: continued fractions and minimal square-root combinations
- zeta: Epstein zeta evaluation and the truncated sharp-count formula
"""

from .lattice import PRESETS, EllipseLattice, LatticeVector, Side, SpectrumTable
from .counting import AnnulusParams, count_sharp, remainder_sharp
from .smoothing import SmoothingKernel, build_kernel, smooth_count, smooth_remainder
from .statistics import MomentReport, SampleEnsemble, WeightWindow, WindowKind, sample_ensemble
from .diophantine import DiophantineReport, cf_expansion, min_sqrt_combination
from .zeta import ZetaMethod, ZetaValue, epstein_eval, truncated_sharp_formula

__all__ = [
    "PRESETS",
    "EllipseLattice",
    "LatticeVector",
    "Side",
    "SpectrumTable",
    "AnnulusParams",
    "count_sharp",
    "remainder_sharp",
    "SmoothingKernel",
    "build_kernel",
    "smooth_count",
    "smooth_remainder",
    "MomentReport",
    "SampleEnsemble",
    "WeightWindow",
    "WindowKind",
    "sample_ensemble",
    "DiophantineReport",
    "cf_expansion",
    "min_sqrt_combination",
    "ZetaMethod",
    "ZetaValue",
    "epstein_eval",
    "truncated_sharp_formula",
]
