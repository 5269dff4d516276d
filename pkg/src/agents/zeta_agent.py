"""
Zeta Check Agent

Cross-checks the Epstein zeta evaluators: the closed form at γ = 1, s = 2,
the functional equation, the residue at s = 1, and agreement of the direct
and integral methods at random points.
"""

import math
from typing import Any, Dict, Optional

import mpmath
import numpy as np

from ..models.zeta import (
    ZetaMethod,
    epstein_eval,
    epstein_table,
    functional_equation_residual,
    residue_check,
)
from ..utils.precision import MPMATH_LOCK
from ..utils.report_formatter import make_check
from .base_agent import BaseAgent


def square_lattice_reference() -> float:
    """Z_1(2) = ζ(2)·β(2), with β(2) Catalan's constant."""
    with MPMATH_LOCK, mpmath.workdps(30):
        return float(mpmath.zeta(2) * mpmath.catalan)


class ZetaCheckAgent(BaseAgent):
    """Epstein zeta consistency checks."""

    def __init__(self, config: Optional[Dict[str, Any]] = None, logger=None):
        super().__init__("ZetaCheckAgent", config, logger)

    def process(self, input_data: Dict[str, Any]) -> Dict[str, Any]:
        config = input_data['config']
        gammas = [float(g) for g in config.option('gammas', [1.0, 2.0, math.e])]
        evaluations = []

        reference = square_lattice_reference()
        direct = epstein_eval(1.0, 2.0, ZetaMethod.DIRECT)
        integral = epstein_eval(1.0, 2.0, ZetaMethod.INTEGRAL)
        evaluations += [direct, integral]
        z1_error = max(abs(direct.value - reference), abs(integral.value - reference))
        self.logger.info(f"Z_1(2) = {direct.value.real:.12f} (reference {reference:.12f})")

        point = config.option('functional_equation_point', {'gamma': 2.0, 's': [2.0, 0.7]})
        fe_gamma = float(point['gamma'])
        fe_s = complex(*[float(x) for x in point['s']])
        fe_residual = functional_equation_residual(fe_gamma, fe_s)
        self.logger.info(f"Functional equation residual at γ={fe_gamma:g}, s={fe_s}: {fe_residual:.3e}")

        h = float(config.option('residue_h', 1e-4))
        residues = {}
        for gamma in gammas:
            estimate = residue_check(gamma, h)
            exact = math.pi / (4.0 * math.sqrt(gamma))
            residues[f"{gamma:.17g}"] = {'estimate': estimate, 'exact': exact,
                                         'relative_error': abs(estimate - exact) / exact}
        residue_error = max(r['relative_error'] for r in residues.values())

        rng = np.random.default_rng(np.random.SeedSequence(config.seed))
        re_lo, re_hi = (float(x) for x in config.option('re_s_range', [1.5, 3.0]))
        im_lo, im_hi = (float(x) for x in config.option('im_s_range', [-3.0, 3.0]))
        n_points = int(config.option('random_points', 20))
        method_diffs = []
        for i in range(n_points):
            gamma = gammas[i % len(gammas)]
            s = complex(rng.uniform(re_lo, re_hi), rng.uniform(im_lo, im_hi))
            a = epstein_eval(gamma, s, ZetaMethod.DIRECT)
            b = epstein_eval(gamma, s, ZetaMethod.INTEGRAL)
            evaluations += [a, b]
            method_diffs.append(abs(a.value - b.value))
        methods_gap = max(method_diffs) if method_diffs else 0.0
        self.logger.info(f"Direct vs integral: max difference {methods_gap:.3e} over {n_points} points")

        tol = config.tolerances
        checks = [
            make_check('z1_at_2', z1_error, upper=tol.get('z1_at_2', 1e-6)),
            make_check('functional_equation', fe_residual, upper=tol.get('functional_equation', 1e-8)),
            make_check('residue_rel', residue_error, upper=tol.get('residue_rel', 1e-3)),
        ]
        if method_diffs:
            checks.append(make_check('methods_agree', methods_gap, upper=tol.get('methods_agree', 1e-8)))

        results = {
            'z1_at_2': {'direct': direct.value, 'integral': integral.value, 'reference': reference},
            'functional_equation': {'gamma': fe_gamma, 's': fe_s, 'residual': fe_residual},
            'residues': residues,
            'methods_max_difference': methods_gap,
        }
        return {'results': results, 'checks': checks, 'tables': {'zeta': epstein_table(evaluations)}}
