"""
Shared plumbing for agents that average over a weighted ensemble of radii.
"""

import math
from dataclasses import replace
from typing import Any, Dict, Optional

import numpy as np

from ..models.statistics import SampleEnsemble, Which, resolve_sigma, sample_ensemble
from .base_agent import BaseAgent


class EnsembleAgent(BaseAgent):
    """Base for the variance, moments, distribution and unsmoothing agents."""

    def sample(self, input_data: Dict[str, Any], which: Which = Which.SMOOTH, M: Optional[float] = None,
               seed: Optional[int] = None, T: Optional[float] = None) -> SampleEnsemble:
        """Draw the configured ensemble, optionally at another M, T or seed."""
        config = input_data['config']
        params = config.annulus()
        if M is not None:
            params = replace(params, M=M)
        if T is not None:
            params = replace(params, T=T)
        self.logger.info(
            f"Sampling {config.n_samples} radii ({which.value}) at T={params.T:g}, L={params.L:g}, M={params.M:g}"
        )
        return sample_ensemble(
            input_data['lattice'],
            params,
            config.weight_window(),
            config.n_samples,
            config.seed if seed is None else seed,
            which,
            kernel=input_data['kernel'],
            threads=config.threads,
            progress=config.progress,
            on_chunk=input_data.get('on_progress'),
            max_vectors=config.max_vectors,
        )

    def sigma(self, input_data: Dict[str, Any]) -> float:
        config = input_data['config']
        return resolve_sigma(
            input_data['lattice'], input_data['kernel'], config.L, config.M,
            config.sigma_mode, config.max_vectors,
        )

    @staticmethod
    def ensemble_outputs(input_data: Dict[str, Any], ens: SampleEnsemble, sigma: float) -> Dict[str, Any]:
        """Optional samples table and histogram payload for the artifact writer."""
        config = input_data['config']
        outputs: Dict[str, Any] = {'tables': {}}
        if config.write_samples:
            outputs['tables']['samples'] = ens.to_frame()
        if config.write_histogram and math.isfinite(sigma) and sigma > 0:
            outputs['histogram'] = np.asarray(ens.s_smooth, dtype=np.float64) / sigma
        return outputs
