"""
Variance Agent

Compares the dual-lattice variance sum with its leading term 8π/(dL),
checks that the principal-diagonal sum at |S| = 2 reproduces it, reports
the diagonal sums for larger |S|, and measures the ensemble variance.

At desk scale the variance sum sits well below 8π/(dL) (about 0.77 of it
at L = 30, M = L³), so the leading term is checked through the finite-L
trend of the ratio rather than a fixed band.
"""

import math
from typing import Any, Dict, Optional

import numpy as np

from ..models.statistics import (
    Which,
    asymptotic_sigma2,
    diagonal_D_sum,
    empirical_moment,
    sigma2_ratio_trend,
    theoretical_sigma2,
)
from ..utils.report_formatter import make_check
from .ensemble_agent import EnsembleAgent


class VarianceAgent(EnsembleAgent):
    """Variance formula and ensemble variance."""

    def __init__(self, config: Optional[Dict[str, Any]] = None, logger=None):
        super().__init__("VarianceAgent", config, logger)

    def process(self, input_data: Dict[str, Any]) -> Dict[str, Any]:
        config = input_data['config']
        lat = input_data['lattice']
        kernel = input_data['kernel']

        sigma2_asym = asymptotic_sigma2(lat, config.L)
        sigma2_theo = theoretical_sigma2(lat, kernel, config.L, config.M, config.max_vectors)
        self.logger.info(f"σ² theoretical = {sigma2_theo:.6g}, asymptotic = {sigma2_asym:.6g}")

        trend = sigma2_ratio_trend(lat, kernel, config.option('sigma2_trend_L', [30.0, 60.0, 100.0]),
                                   config.max_vectors)
        ratios = list(trend.values())
        for L, ratio in trend.items():
            self.logger.info(f"L = {L:g}: σ²/(8π/(dL)) = {ratio:.4f}")

        sigma_theo = math.sqrt(sigma2_theo)
        d_sums = {}
        for order in config.option('d_sum_orders', [2]):
            d_sums[str(order)] = diagonal_D_sum(
                lat, kernel, config.L, config.M, int(order), sigma_theo, max_vectors=config.max_vectors,
            )
        d2_literal = diagonal_D_sum(
            lat, kernel, config.L, config.M, 2, sigma_theo, kernel_reading='literal', max_vectors=config.max_vectors,
        )

        ens = self.sample(input_data, Which.SMOOTH)
        sigma_ref = self.sigma(input_data)
        second = empirical_moment(ens, 2, sigma_ref)
        empirical_variance = second.empirical * sigma_ref ** 2

        tol = config.tolerances
        low, high = tol.get('variance_ratio', [0.85, 1.15])
        checks = [
            make_check('sigma2_trend_rising', float(np.min(np.diff(ratios))) if len(ratios) > 1 else math.nan,
                       lower=0.0),
            make_check('sigma2_trend_below_leading', max(ratios), upper=tol.get('sigma2_trend_max', 1.0)),
            make_check('variance_ratio', second.empirical, lower=low, upper=high),
        ]
        if '2' in d_sums:
            checks.insert(2, make_check('d2_identity', abs(d_sums['2'] - 1.0), upper=tol.get('d2_identity', 1e-6)))

        results = {
            'sigma2_asymptotic': sigma2_asym,
            'sigma2_theoretical': sigma2_theo,
            'sigma2_ratio': sigma2_theo / sigma2_asym,
            'sigma2_ratio_trend': {f"{L:g}": ratio for L, ratio in trend.items()},
            'diagonal_sums': d_sums,
            'd2_readings': {'scaled': d_sums.get('2'), 'literal': d2_literal},
            'empirical_variance': empirical_variance,
            'variance_ratio': second.empirical,
            'variance_ratio_stderr': second.stderr,
            'variance_ratio_theoretical': empirical_variance / sigma2_theo,
            'variance_ratio_asymptotic': empirical_variance / sigma2_asym,
            'sigma_mode': config.sigma_mode,
            'n_samples': len(ens),
        }
        output = {'results': results, 'checks': checks}
        output.update(self.ensemble_outputs(input_data, ens, sigma_ref))
        return output
