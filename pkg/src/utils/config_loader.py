"""
Configuration Loading for the Annuli Pipeline

Experiment parameters are resolved in layers, later layers winning:

    built-in defaults < built-in experiment defaults < YAML `defaults:`
    < YAML `experiments.<name>:` < command-line flags

The YAML file also carries `runtime:` (threads, progress), `output:` and
`logging:` sections.
"""

import copy
import logging
import math
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml

from ..models.counting import AnnulusParams
from ..models.lattice import PRESETS, EllipseLattice
from ..models.statistics import WeightWindow, WindowKind
from .errors import UsageError

EXPERIMENTS = (
    "variance",
    "moments",
    "distribution",
    "unsmoothing",
    "poisson_truncation",
    "zeta_check",
    "dioph_scan",
    "spectrum",
)
SIGMA_MODES = ("asymptotic", "theoretical")
THREADS_ENV = "ANNULI_THREADS"
DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent.parent.parent / "configs" / "experiment_config.yaml"

# fields reported under `runtime` rather than as experiment inputs
RUNTIME_FIELDS = ("threads", "progress")

EXPERIMENT_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "variance": {
        "alpha": "e", "T": 1.0e4, "L": 30.0, "n_samples": 100_000, "sigma_mode": "theoretical",
        "options": {"d_sum_orders": [2, 3, 4, 5, 6], "sigma2_trend_L": [30.0, 60.0, 100.0]},
        "tolerances": {"sigma2_trend_max": 1.0, "d2_identity": 1.0e-6, "variance_ratio": [0.85, 1.15]},
    },
    "moments": {
        "alpha": "e", "T": 1.0e4, "L": 30.0, "n_samples": 100_000, "sigma_mode": "theoretical",
        "options": {"max_order": 6},
        "tolerances": {"m1_stderrs": 3.0, "m2": [0.85, 1.15], "m3_stderrs": 3.0, "m3_rate_factor": 1.0, "m4": [2.6, 3.4]},
    },
    "distribution": {
        "alpha": "e", "T": 1.0e4, "L": 30.0, "n_samples": 100_000, "sigma_mode": "theoretical",
        "options": {"sandwich_epsilon": 0.05, "sandwich_samples": 20_000, "sandwich_interval": [-1.0, 1.0]},
        "tolerances": {"ks": 0.02},
    },
    "unsmoothing": {
        "alpha": "sqrt2", "T": 5000.0, "L": 20.0, "n_samples": 10_000,
        "options": {"M_values": [1.0e3, 1.0e4]},
        "tolerances": {"gap_ratio": 2.0, "gap_constant_stability": [0.7, 1.4]},
    },
    "poisson_truncation": {
        "alpha": "sqrt2", "n_samples": 1000,
        "options": {"t_range": [100.0, 200.0], "N_values": [1.0e2, 1.0e6]},
        "tolerances": {"rms_ratio": 3.0},
    },
    "zeta_check": {
        "options": {
            "gammas": [1.0, 2.0, math.e],
            "functional_equation_point": {"gamma": 2.0, "s": [2.0, 0.7]},
            "residue_h": 1.0e-4,
            "random_points": 20,
            "re_s_range": [1.5, 3.0],
            "im_s_range": [-3.0, 3.0],
        },
        "tolerances": {"z1_at_2": 1.0e-6, "functional_equation": 1.0e-8, "residue_rel": 1.0e-3, "methods_agree": 1.0e-8},
    },
    "dioph_scan": {
        "alpha": "e",
        "options": {
            "cf_depth": 30,
            "combination_orders": [2, 3],
            "combination_Mmax": [20.0, 40.0, 80.0, 120.0],
            "gap_M": [1.0e2, 1.0e3, 1.0e4, 1.0e5],
            "sign_product_point": [2.0, 3.0, 5.0],
        },
        "tolerances": {"q_identity": 1.0e-9, "q_symbolic": 1.0e-9},
    },
    "spectrum": {
        "alpha": "two_pow_quarter",
        "options": {"cutoff": 1.0e4, "pair_radii": [100.0, 400.0, 1600.0], "pair_delta": 0.5},
        "tolerances": {"multiplicity_violations": 0, "pair_growth": 2.0},
    },
}


def _positive(name: str, value: Any) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise UsageError(f"{name} must be a number, got {value!r}")
    if not (math.isfinite(value) and value > 0):
        raise UsageError(f"{name} must be positive, got {value}")
    return value


@dataclass
class ExperimentConfig:
    """
    Fully resolved parameters of one experiment run.

    Attributes:
        experiment: One of EXPERIMENTS
        alpha: Preset name or numeric aspect ratio
        T: Ensemble scale
        L: Inverse annulus width
        M: Smoothness parameter (materialized to L³ when absent)
        window: Weight window kind
        window_center: Gaussian window center
        window_width: Gaussian window width
        n_samples: Ensemble size
        seed: Root seed
        sigma_mode: asymptotic or theoretical normalization
        grid_points: Kernel tabulation size
        max_vectors: Enumeration budget
        threads: Worker threads (None for the CPU count)
        progress: Show progress bars
        out_dir: Output directory
        write_samples: Emit samples.csv
        write_histogram: Emit histogram.svg
        write_spectrum: Emit spectrum/kernel/zeta tables when produced
        options: Experiment-specific parameters
        tolerances: Experiment-specific check bounds
    """

    experiment: str
    alpha: Union[str, float] = "e"
    T: float = 1.0e4
    L: float = 30.0
    M: Optional[float] = None
    window: str = WindowKind.SMOOTH_GAUSSIAN.value
    window_center: float = 1.5
    window_width: float = 0.25
    n_samples: int = 100_000
    seed: int = 0
    sigma_mode: str = "asymptotic"
    grid_points: int = 4096
    max_vectors: int = 100_000_000
    threads: Optional[int] = None
    progress: bool = False
    out_dir: str = "outputs/annuli"
    write_samples: bool = False
    write_histogram: bool = False
    write_spectrum: bool = True
    options: Dict[str, Any] = field(default_factory=dict)
    tolerances: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise UsageError(f"Unknown experiment '{self.experiment}'. Known: {list(EXPERIMENTS)}")
        if isinstance(self.alpha, str) and self.alpha not in PRESETS:
            try:
                self.alpha = float(self.alpha)
            except ValueError:
                raise UsageError(f"Unknown lattice preset '{self.alpha}'. Known: {sorted(PRESETS)}")
        if not isinstance(self.alpha, str):
            self.alpha = _positive("alpha", self.alpha)
        self.T = _positive("T", self.T)
        self.L = _positive("L", self.L)
        self.M = self.L ** 3 if self.M is None else _positive("M", self.M)
        self.window_center = _positive("window_center", self.window_center)
        self.window_width = _positive("window_width", self.window_width)
        if self.window not in {kind.value for kind in WindowKind}:
            raise UsageError(f"Unknown window '{self.window}'. Known: {[kind.value for kind in WindowKind]}")
        if self.sigma_mode not in SIGMA_MODES:
            raise UsageError(f"Unknown sigma mode '{self.sigma_mode}'. Known: {list(SIGMA_MODES)}")
        self.n_samples = int(float(self.n_samples))
        if self.n_samples < 1:
            raise UsageError(f"n_samples must be at least 1, got {self.n_samples}")
        self.seed = int(self.seed)
        if self.seed < 0:
            raise UsageError(f"seed must be non-negative, got {self.seed}")
        self.grid_points = int(self.grid_points)
        self.max_vectors = int(float(self.max_vectors))
        if self.threads is not None:
            self.threads = int(self.threads)
            if self.threads < 1:
                raise UsageError(f"threads must be at least 1, got {self.threads}")
        self.out_dir = str(self.out_dir)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise UsageError(f"Unknown configuration keys: {unknown}")
        if "experiment" not in data:
            raise UsageError("Configuration needs an 'experiment'")
        return cls(**copy.deepcopy(data))

    def to_dict(self, include_runtime: bool = True) -> Dict[str, Any]:
        data = asdict(self)
        if not include_runtime:
            for name in RUNTIME_FIELDS:
                data.pop(name)
        return data

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True, default_flow_style=False)

    @classmethod
    def from_yaml(cls, text: str) -> "ExperimentConfig":
        data = yaml.safe_load(text)
        if not isinstance(data, dict):
            raise UsageError("Configuration YAML must be a mapping")
        return cls.from_dict(data)

    def lattice(self) -> EllipseLattice:
        return EllipseLattice.resolve(self.alpha)

    def annulus(self) -> AnnulusParams:
        return AnnulusParams(T=self.T, L=self.L, M=self.M)

    def weight_window(self) -> WeightWindow:
        return WeightWindow(WindowKind(self.window), center=self.window_center, width=self.window_width)

    def option(self, name: str, default: Any = None) -> Any:
        return self.options.get(name, default)

    def tolerance(self, name: str, default: Any = None) -> Any:
        return self.tolerances.get(name, default)


def _merge(base: Dict[str, Any], overlay: Optional[Dict[str, Any]]) -> Dict[str, Any]:
    """Recursive dictionary merge; overlay wins, nested dicts are merged."""
    merged = copy.deepcopy(base)
    for key, value in (overlay or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def load_config(config_path: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """
    Load the raw YAML configuration.

    Args:
        config_path: Path to a YAML file; the packaged default when None

    Returns:
        Raw configuration dictionary (empty when the default file is absent)
    """
    path = Path(config_path) if config_path is not None else DEFAULT_CONFIG_PATH
    if not path.exists():
        if config_path is not None:
            raise UsageError(f"Config file not found: {path}")
        return {}
    try:
        with open(path, 'r') as f:
            raw = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise UsageError(f"Invalid YAML in {path}: {e}")
    if not isinstance(raw, dict):
        raise UsageError(f"Config file {path} must contain a mapping")
    return raw


def resolve_threads(flag: Optional[int], runtime_threads: Optional[int]) -> Optional[int]:
    """Thread count: flag, then the ANNULI_THREADS variable, then the config file."""
    if flag is not None:
        return int(flag)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be an integer, got {env!r}")
    return None if runtime_threads is None else int(runtime_threads)


def resolve_config(
    experiment: str,
    raw: Optional[Dict[str, Any]] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> ExperimentConfig:
    """
    Resolve an ExperimentConfig from the layered sources.

    Args:
        experiment: Experiment name
        raw: Raw YAML configuration (see load_config)
        overrides: Command-line values; None entries are ignored

    Returns:
        ExperimentConfig
    """
    if experiment not in EXPERIMENTS:
        raise UsageError(f"Unknown experiment '{experiment}'. Known: {list(EXPERIMENTS)}")
    raw = raw or {}
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}

    data: Dict[str, Any] = {"experiment": experiment}
    data = _merge(data, EXPERIMENT_DEFAULTS.get(experiment))
    data = _merge(data, raw.get("defaults"))
    data = _merge(data, (raw.get("experiments") or {}).get(experiment))

    runtime = raw.get("runtime") or {}
    if "progress" in runtime:
        data["progress"] = bool(runtime["progress"])
    output = raw.get("output") or {}
    for key in ("out_dir", "write_samples", "write_histogram", "write_spectrum"):
        if key in output:
            data[key] = output[key]

    flag_threads = overrides.pop("threads", None)
    data["threads"] = resolve_threads(flag_threads, runtime.get("threads"))
    data = _merge(data, overrides)
    data["experiment"] = experiment
    return ExperimentConfig.from_dict(data)


PIPELINE_LOGGER = "ExperimentPipeline"


def setup_logging(raw: Optional[Dict[str, Any]] = None, level: Optional[str] = None) -> logging.Logger:
    """
    Configure the pipeline and module loggers from the `logging:` section.

    Args:
        raw: Raw YAML configuration
        level: Level override (e.g. from a --verbose flag)

    Returns:
        The pipeline logger
    """
    settings = (raw or {}).get("logging") or {}
    level_name = str(level or settings.get("level", "INFO")).upper()
    if not isinstance(logging.getLevelName(level_name), int):
        raise UsageError(f"Unknown log level '{level_name}'")
    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    log_file = settings.get("file")
    for name in ("src", PIPELINE_LOGGER):
        logger = logging.getLogger(name)
        logger.setLevel(level_name)
        if not logger.handlers:
            handler = logging.StreamHandler()
            handler.setFormatter(formatter)
            logger.addHandler(handler)
            if log_file:
                Path(log_file).parent.mkdir(parents=True, exist_ok=True)
                file_handler = logging.FileHandler(log_file)
                file_handler.setFormatter(formatter)
                logger.addHandler(file_handler)
    return logging.getLogger(PIPELINE_LOGGER)


__all__ = [
    "EXPERIMENTS",
    "EXPERIMENT_DEFAULTS",
    "ExperimentConfig",
    "load_config",
    "resolve_config",
    "resolve_threads",
    "setup_logging",
]
