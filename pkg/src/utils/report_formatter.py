"""
Report Formatting Utilities for the Annuli Pipeline

Functions for assembling experiment reports and writing their artifacts:
- tolerance checks and the report dictionary
- report.json with sorted keys and plain JSON types
- CSV tables and the self-contained histogram SVG
"""

import hashlib
import json
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

REPORT_FILENAME = "report.json"
FLOAT_FORMAT = "%.17g"


def make_check(
    name: str,
    value: float,
    lower: Optional[float] = None,
    upper: Optional[float] = None,
) -> Dict[str, Any]:
    """
    Build a tolerance check.

    Args:
        name: Check identifier
        value: Measured value
        lower: Inclusive lower bound (None for unbounded)
        upper: Inclusive upper bound (None for unbounded)

    Returns:
        Dictionary {name, value, lower, upper, passed}
    """
    value = float(value)
    passed = math.isfinite(value)
    if lower is not None:
        passed = passed and value >= lower
    if upper is not None:
        passed = passed and value <= upper
    return {
        'name': name,
        'value': value,
        'lower': None if lower is None else float(lower),
        'upper': None if upper is None else float(upper),
        'passed': bool(passed),
    }


def make_flag_check(name: str, flag: bool) -> Dict[str, Any]:
    """A boolean check reported as value 1.0 (true) or 0.0 (false)."""
    return make_check(name, 1.0 if flag else 0.0, lower=1.0)


def checks_passed(checks: Sequence[Dict[str, Any]]) -> bool:
    return all(check['passed'] for check in checks)


def to_builtin(obj: Any) -> Any:
    """Convert numpy scalars/arrays, enums, complex numbers and paths to JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_builtin(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_builtin(v) for v in obj.tolist()]
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if math.isfinite(value) else str(value)
    if isinstance(obj, (complex, np.complexfloating)):
        return {'re': to_builtin(obj.real), 'im': to_builtin(obj.imag)}
    if isinstance(obj, Path):
        return str(obj)
    return obj


def format_report(
    experiment: str,
    config: Dict[str, Any],
    results: Dict[str, Any],
    checks: List[Dict[str, Any]],
    metadata: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    """
    Format an experiment report into the standard structure.

    Args:
        experiment: Experiment name
        config: Fully resolved configuration
        results: Numeric results
        checks: Tolerance checks
        metadata: workflow_id, pipeline_version, timestamp

    Returns:
        Report dictionary with plain JSON types
    """
    return to_builtin({
        'experiment': experiment,
        'config': config,
        'results': results,
        'checks': list(checks),
        'passed': checks_passed(checks),
        'metadata': metadata or {},
    })


def dumps_report(report: Dict[str, Any]) -> str:
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=True) + "\n"


def write_report_json(report: Dict[str, Any], out_dir: Union[str, Path]) -> Path:
    """Write report.json into out_dir (created if missing)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / REPORT_FILENAME
    path.write_text(dumps_report(report), encoding="utf-8")
    return path


def report_digest(report: Dict[str, Any], exclude: Sequence[str] = ('timestamp',)) -> str:
    """SHA-256 of a report with the listed metadata fields removed."""
    stripped = dict(report)
    stripped['metadata'] = {k: v for k, v in report.get('metadata', {}).items() if k not in exclude}
    return hashlib.sha256(dumps_report(stripped).encode("utf-8")).hexdigest()


def write_csv(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def write_histogram_svg(
    values: np.ndarray,
    path: Union[str, Path],
    title: str = "",
    bins: int = 60,
) -> Path:
    """
    Histogram of normalized values with the standard normal density overlaid.

    Text is rendered as paths, the SVG hash salt is fixed and no date is
    written, so identical inputs give identical files.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from scipy.stats import norm

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    values = np.asarray(values, dtype=np.float64)
    values = values[np.isfinite(values)]

    with matplotlib.rc_context({'svg.hashsalt': 'annuli', 'svg.fonttype': 'path'}):
        fig, ax = plt.subplots(figsize=(7, 4.5))
        ax.hist(values, bins=bins, range=(-5, 5), density=True, alpha=0.6, color='tab:blue', label='samples')
        x = np.linspace(-5, 5, 401)
        ax.plot(x, norm.pdf(x), 'k-', linewidth=1.5, label='N(0, 1)')
        ax.set_xlabel('S / σ')
        ax.set_ylabel('density')
        if title:
            ax.set_title(title)
        ax.legend()
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        fig.savefig(path, format='svg', metadata={'Date': None})
        plt.close(fig)
    return path


def format_summary(report: Dict[str, Any]) -> str:
    """Human-readable summary of the checks in a report."""
    lines = [f"Experiment: {report.get('experiment')}"]
    for check in report.get('checks', []):
        bounds = f"[{check['lower']}, {check['upper']}]"
        status = 'PASS' if check['passed'] else 'FAIL'
        lines.append(f"  {status} {check['name']}: {check['value']:.6g} {bounds}")
    lines.append(f"Overall: {'PASS' if report.get('passed') else 'FAIL'}")
    return "\n".join(lines)
