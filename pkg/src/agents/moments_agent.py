"""
Moments Agent

Normalized moments ⟨(S̃/σ)^m⟩ of the smoothed remainder against the
Gaussian values 0, 1, 0, 3, 0, 15. The third moment is compared with the
principal-diagonal sum at |S| = 3, which predicts its size at finite L.
"""

import math
from typing import Any, Dict, Optional

from ..models.statistics import Which, diagonal_D_sum, empirical_moment
from ..utils.report_formatter import make_check
from .ensemble_agent import EnsembleAgent


class MomentsAgent(EnsembleAgent):
    """Gaussian moment comparison on the smoothed ensemble."""

    def __init__(self, config: Optional[Dict[str, Any]] = None, logger=None):
        super().__init__("MomentsAgent", config, logger)

    def process(self, input_data: Dict[str, Any]) -> Dict[str, Any]:
        config = input_data['config']
        sigma = self.sigma(input_data)
        ens = self.sample(input_data, Which.SMOOTH)

        max_order = int(config.option('max_order', 6))
        moments = {m: empirical_moment(ens, m, sigma) for m in range(1, max(4, max_order) + 1)}
        for report in moments.values():
            self.logger.info(
                f"M{report.order} = {report.empirical:.4f} ± {report.stderr:.4f} (Gaussian {report.gaussian_target:g})"
            )

        # |M₃| is predicted by D(|S|=3) under the same normalization
        d3 = diagonal_D_sum(input_data['lattice'], input_data['kernel'], config.L, config.M, 3, sigma,
                            max_vectors=config.max_vectors)
        rate = math.log(config.L) / config.L
        self.logger.info(f"D₃ = {d3:.4f}, rate scale log L/L = {rate:.4f}")

        tol = config.tolerances
        m1, m3 = moments[1], moments[3]
        m3_allowance = tol.get('m3_stderrs', 3.0) * m3.stderr + tol.get('m3_rate_factor', 1.0) * rate
        checks = [
            make_check('m1_in_stderrs', abs(m1.empirical) / m1.stderr if m1.stderr > 0 else abs(m1.empirical),
                       upper=tol.get('m1_stderrs', 3.0)),
            make_check('m2', moments[2].empirical, *tol.get('m2', [0.85, 1.15])),
            make_check('m3_vs_diagonal', abs(abs(m3.empirical) - d3), upper=m3_allowance),
            make_check('m4', moments[4].empirical, *tol.get('m4', [2.6, 3.4])),
        ]

        results = {
            'sigma': sigma,
            'sigma_mode': config.sigma_mode,
            'moments': {str(m): report.to_dict() for m, report in moments.items()},
            'd3_prediction': d3,
            'm3_allowance': m3_allowance,
            'rate_scale': rate,
            'n_samples': len(ens),
        }
        output = {'results': results, 'checks': checks}
        output.update(self.ensemble_outputs(input_data, ens, sigma))
        return output
