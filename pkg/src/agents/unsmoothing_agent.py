"""
Unsmoothing Agent

Measures the mean squared gap ⟨|S − S̃|²⟩_T between the sharp and smoothed
remainders for several smoothness parameters M, fits the constant
C = gap·√M and checks that C is stable when T is doubled.
"""

import math
from typing import Any, Dict, Optional

import pandas as pd

from ..models.statistics import Which, mean_squared_difference
from ..utils.report_formatter import make_check
from .ensemble_agent import EnsembleAgent


class UnsmoothingAgent(EnsembleAgent):
    """Sharp versus smoothed remainder gap."""

    def __init__(self, config: Optional[Dict[str, Any]] = None, logger=None):
        super().__init__("UnsmoothingAgent", config, logger)

    def _gap(self, input_data: Dict[str, Any], M: float, T: Optional[float] = None):
        ens = self.sample(input_data, Which.BOTH, M=M, T=T)
        gap, stderr = mean_squared_difference(ens.s_sharp, ens.s_smooth)
        return ens, gap, stderr

    def process(self, input_data: Dict[str, Any]) -> Dict[str, Any]:
        config = input_data['config']
        M_values = [float(M) for M in config.option('M_values', [config.M])]

        gaps, errors, constants = [], [], []
        for M in M_values:
            ens, gap, stderr = self._gap(input_data, M)
            constants.append(gap * math.sqrt(M))
            self.logger.info(f"M = {M:g}: gap = {gap:.5g} ± {stderr:.2g}, C = gap·√M = {constants[-1]:.4g}")
            gaps.append(gap)
            errors.append(stderr)

        M_top = M_values[-1]
        T_doubled = 2.0 * config.T
        _, gap_doubled, stderr_doubled = self._gap(input_data, M_top, T=T_doubled)
        constant_doubled = gap_doubled * math.sqrt(M_top)
        stability = constant_doubled / constants[-1] if constants[-1] > 0 else math.inf
        self.logger.info(f"T = {T_doubled:g}, M = {M_top:g}: C = {constant_doubled:.4g} (ratio {stability:.3f})")

        tol = config.tolerances
        ratio = gaps[0] / gaps[-1] if gaps[-1] > 0 else math.inf
        checks = []
        if len(M_values) > 1:
            checks.append(make_check('gap_ratio', ratio, lower=tol.get('gap_ratio', 2.0)))
        low, high = tol.get('gap_constant_stability', [0.7, 1.4])
        checks.append(make_check('gap_constant_stability', stability, lower=low, upper=high))

        table = pd.DataFrame({
            'T': [config.T] * len(M_values) + [T_doubled],
            'M': M_values + [M_top],
            'gap': gaps + [gap_doubled],
            'stderr': errors + [stderr_doubled],
            'constant': constants + [constant_doubled],
        })
        results = {
            'M_values': M_values,
            'gaps': gaps,
            'stderr': errors,
            'gap_constants': constants,
            'gap_constant': constants[-1],
            'gap_constant_doubled_T': constant_doubled,
            'gap_constant_stability': stability,
            'gap_ratio': ratio,
            'n_samples': config.n_samples,
        }
        tables = {'unsmoothing': table}
        if config.write_samples:
            tables['samples'] = ens.to_frame()
        return {'results': results, 'checks': checks, 'tables': tables}
