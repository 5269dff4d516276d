"""
Distribution Agent

Kolmogorov-Smirnov distance of S̃/σ to the standard normal and the
indicator-window sandwich between smooth plateau windows.
"""

from typing import Any, Dict, Optional

from ..models.statistics import Which, ks_distance, window_sandwich
from ..utils.report_formatter import make_check, make_flag_check
from .ensemble_agent import EnsembleAgent


class DistributionAgent(EnsembleAgent):
    """Distributional checks on the smoothed ensemble."""

    def __init__(self, config: Optional[Dict[str, Any]] = None, logger=None):
        super().__init__("DistributionAgent", config, logger)

    def process(self, input_data: Dict[str, Any]) -> Dict[str, Any]:
        config = input_data['config']
        sigma = self.sigma(input_data)
        ens = self.sample(input_data, Which.SMOOTH)
        ks = ks_distance(ens, sigma)
        self.logger.info(f"KS distance = {ks:.4f}")

        epsilon = float(config.option('sandwich_epsilon', 0.05))
        interval = tuple(float(x) for x in config.option('sandwich_interval', [-1.0, 1.0]))
        sandwich = window_sandwich(
            input_data['lattice'],
            input_data['kernel'],
            config.annulus(),
            sigma,
            interval=interval,
            n_samples=int(config.option('sandwich_samples', 20000)),
            seed=config.seed,
            epsilon=epsilon,
            threads=config.threads,
            max_vectors=config.max_vectors,
        )
        self.logger.info(
            f"Sandwich: {sandwich['lower_bound']:.4f} ≤ {sandwich['p_indicator']:.4f} ≤ {sandwich['upper_bound']:.4f}"
        )

        checks = [
            make_check('ks_distance', ks, upper=config.tolerance('ks', 0.02)),
            make_flag_check('window_sandwich', sandwich['passed']),
        ]
        results = {
            'sigma': sigma,
            'sigma_mode': config.sigma_mode,
            'ks_distance': ks,
            'sandwich': sandwich,
            'n_samples': len(ens),
        }
        output = {'results': results, 'checks': checks}
        output.update(self.ensemble_outputs(input_data, ens, sigma))
        return output
