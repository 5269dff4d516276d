"""
Spectrum Agent

Primal norm spectrum up to a cutoff: the multiplicity law r(n, m), the total
vector count against the sharp counter, and near-pair counts over growing
ranges.
"""

import math
from typing import Any, Dict, Optional

import pandas as pd

from ..models.counting import count_sharp
from ..models.lattice import Side, multiplicity_violations, norm_spectrum, pair_near_count
from ..utils.report_formatter import make_check, make_flag_check
from .base_agent import BaseAgent


class SpectrumAgent(BaseAgent):
    """Spectrum tabulation and multiplicity checks."""

    def __init__(self, config: Optional[Dict[str, Any]] = None, logger=None):
        super().__init__("SpectrumAgent", config, logger)

    def process(self, input_data: Dict[str, Any]) -> Dict[str, Any]:
        config = input_data['config']
        lat = input_data['lattice']
        cutoff = float(config.option('cutoff', 1e4))

        table = norm_spectrum(lat, Side.PRIMAL, cutoff, max_vectors=config.max_vectors)
        violations = multiplicity_violations(table)
        total = table.total_vectors()
        expected_total = count_sharp(lat, math.sqrt(cutoff))
        self.logger.info(f"{len(table)} distinct norms, {total} vectors, {violations} multiplicity violations")

        delta = float(config.option('pair_delta', 0.5))
        radii = [float(R) for R in config.option('pair_radii', [100.0, 400.0, 1600.0])]
        pairs = [pair_near_count(lat, R, delta, max_vectors=config.max_vectors) for R in radii]
        per_R = [p / R for p, R in zip(pairs, radii)]
        growth = max(per_R) / min(per_R) if min(per_R) > 0 else math.inf

        tol = config.tolerances
        checks = [
            make_check('multiplicity_violations', violations, upper=tol.get('multiplicity_violations', 0)),
            make_flag_check('spectrum_total_matches_count', total == expected_total),
            make_check('pair_count_growth', growth, upper=tol.get('pair_growth', 2.0)),
        ]
        results = {
            'cutoff': cutoff,
            'distinct_norms': len(table),
            'total_vectors': total,
            'min_gap': table.min_gap,
            'multiplicity_violations': violations,
            'pair_delta': delta,
            'pair_radii': radii,
            'pair_counts': pairs,
            'pair_counts_per_R': per_R,
        }
        tables = {
            'spectrum': table.to_frame(),
            'pairs': pd.DataFrame({'R': radii, 'pairs': pairs, 'pairs_per_R': per_R}),
        }
        return {'results': results, 'checks': checks, 'tables': tables}
