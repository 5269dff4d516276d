"""
Poisson Truncation Agent

RMS residual of the hard-cutoff dual formula for N(t) over random radii,
for several cutoffs N.
"""

from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from ..models.zeta import rms_residual
from ..utils.report_formatter import make_check
from .base_agent import BaseAgent


class PoissonTruncationAgent(BaseAgent):
    """Truncated sharp-count formula residuals."""

    def __init__(self, config: Optional[Dict[str, Any]] = None, logger=None):
        super().__init__("PoissonTruncationAgent", config, logger)

    def process(self, input_data: Dict[str, Any]) -> Dict[str, Any]:
        config = input_data['config']
        lat = input_data['lattice']
        t_min, t_max = (float(x) for x in config.option('t_range', [100.0, 200.0]))
        N_values = [float(N) for N in config.option('N_values', [1e2, 1e6])]

        rng = np.random.default_rng(np.random.SeedSequence(config.seed))
        ts = rng.uniform(t_min, t_max, config.n_samples)

        rms = []
        for N in N_values:
            value = rms_residual(lat, ts, N, config.max_vectors)
            self.logger.info(f"N = {N:g}: RMS residual = {value:.5g}")
            rms.append(value)

        ratio = rms[0] / rms[-1] if rms[-1] > 0 else float('inf')
        checks = []
        if len(N_values) > 1:
            checks.append(make_check('rms_ratio', ratio, lower=config.tolerance('rms_ratio', 3.0)))

        results = {
            't_range': [t_min, t_max],
            'N_values': N_values,
            'rms_residual': rms,
            'rms_ratio': ratio,
            'n_samples': len(ts),
        }
        table = pd.DataFrame({'N': N_values, 'rms_residual': rms})
        return {'results': results, 'checks': checks, 'tables': {'truncation': table}}
