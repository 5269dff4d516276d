"""
Diophantine Agent

Continued fraction of γ = α², the sign-product polynomial Q, minimal
square-root combinations of the dual form n² + κm², and minimal gaps
between dual norms, each with a log-log trend.
"""

import math
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from ..models.diophantine import (
    cf_expansion,
    combination_scan,
    convergent_bound_holds,
    dual_gap_scan,
    high_precision_power,
    sign_product_Q,
    sign_product_report,
)
from ..models.lattice import PRESETS
from ..utils.report_formatter import make_check, make_flag_check
from .base_agent import BaseAgent

IDENTITY_PAIRS = 1000


class DiophantineAgent(BaseAgent):
    """Empirical Diophantine diagnostics for the configured lattice."""

    def __init__(self, config: Optional[Dict[str, Any]] = None, logger=None):
        super().__init__("DiophantineAgent", config, logger)

    def process(self, input_data: Dict[str, Any]) -> Dict[str, Any]:
        config = input_data['config']
        lat = input_data['lattice']
        tol = config.tolerances

        # Step 1: continued fraction of γ
        eta = high_precision_power(config.alpha, 2) if config.alpha in PRESETS else lat.gamma
        report = cf_expansion(eta, int(config.option('cf_depth', 30)))
        bound_ok = convergent_bound_holds(report)
        self.logger.info(f"CF of γ: depth {report.depth}, exponent ≈ {report.exponent_estimate:.3f}")

        # Step 2: Q identity and symbolic agreement
        rng = np.random.default_rng(np.random.SeedSequence(config.seed))
        pairs = rng.uniform(0.0, 100.0, size=(IDENTITY_PAIRS, 2))
        identity_error = max(
            abs(sign_product_Q(z) - (z[0] - z[1]) ** 2) / max(1.0, (z[0] + z[1]) ** 2) for z in pairs
        )
        q3 = sign_product_report(config.option('sign_product_point', [2.0, 3.0, 5.0]))
        report.height = q3.get('height')

        # Step 3: minimal combinations of dual norms
        frames = []
        slopes = {}
        for m in config.option('combination_orders', [2, 3]):
            frame, slope = combination_scan(lat.kappa, int(m), config.option('combination_Mmax', [50.0, 100.0]))
            frames.append(frame)
            slopes[int(m)] = slope
            self.logger.info(f"m = {m}: minimal combination slope {slope:.3f}")
        if 2 in slopes:
            report.K1_estimate = -slopes[2] if math.isfinite(slopes[2]) else None
        if 3 in slopes:
            report.K2_estimate = -slopes[3] if math.isfinite(slopes[3]) else None

        # Step 4: dual norm gaps
        gaps, gap_slope = dual_gap_scan(lat, config.option('gap_M', [1e2, 1e3, 1e4]), config.max_vectors)
        gaps_positive = bool(np.all(gaps['min_gap'] > 0))

        checks = [
            make_flag_check('convergent_bound', bound_ok),
            make_check('q_identity', identity_error, upper=tol.get('q_identity', 1e-9)),
            make_check('q_symbolic', q3.get('relative_error', math.nan), upper=tol.get('q_symbolic', 1e-9)),
            make_flag_check('dual_gaps_positive', gaps_positive),
            make_flag_check('dual_gap_slope_finite', math.isfinite(gap_slope)),
        ]
        results = {
            'continued_fraction': report.to_dict(),
            'q_identity_max_error': identity_error,
            'sign_product': q3,
            'combination_slopes': {str(m): s for m, s in slopes.items()},
            'dual_gaps': gaps['min_gap'].tolist(),
            'dual_gap_M': gaps['M'].tolist(),
            'dual_gap_slope': gap_slope,
        }
        tables = {
            'gaps': gaps,
            'combinations': pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(),
        }
        return {'results': results, 'checks': checks, 'tables': tables}
