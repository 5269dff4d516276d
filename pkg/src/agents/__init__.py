"""
Agentic Framework for the Annuli Experiment Pipeline

Each agent runs one experiment and reports results with tolerance checks:
- VarianceAgent: Variance sum, diagonal sums and ensemble variance
- MomentsAgent: Gaussian moment comparison
- DistributionAgent: KS distance and window sandwich
- UnsmoothingAgent: Sharp versus smoothed remainder gap
- PoissonTruncationAgent: Truncated sharp-count formula residuals
- ZetaCheckAgent: Epstein zeta consistency
- DiophantineAgent: Continued fractions, Q and minimal gaps
- SpectrumAgent: Norm spectrum and multiplicities
"""

from .base_agent import BaseAgent
from .ensemble_agent import EnsembleAgent
from .variance_agent import VarianceAgent
from .moments_agent import MomentsAgent
from .distribution_agent import DistributionAgent
from .unsmoothing_agent import UnsmoothingAgent
from .poisson_agent import PoissonTruncationAgent
from .zeta_agent import ZetaCheckAgent
from .diophantine_agent import DiophantineAgent
from .spectrum_agent import SpectrumAgent

AGENT_REGISTRY = {
    "variance": VarianceAgent,
    "moments": MomentsAgent,
    "distribution": DistributionAgent,
    "unsmoothing": UnsmoothingAgent,
    "poisson_truncation": PoissonTruncationAgent,
    "zeta_check": ZetaCheckAgent,
    "dioph_scan": DiophantineAgent,
    "spectrum": SpectrumAgent,
}

__all__ = [
    "AGENT_REGISTRY",
    "BaseAgent",
    "EnsembleAgent",
    "VarianceAgent",
    "MomentsAgent",
    "DistributionAgent",
    "UnsmoothingAgent",
    "PoissonTruncationAgent",
    "ZetaCheckAgent",
    "DiophantineAgent",
    "SpectrumAgent",
]
