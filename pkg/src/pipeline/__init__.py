"""
Pipeline Orchestrator for Annuli

Main pipeline that dispatches experiments to agents:
- ExperimentPipeline: End-to-end experiment run with artifact emission
- WorkflowManager: Workflow state and progress counters
"""

from .experiment_pipeline import ExperimentPipeline, run_experiment
from .workflow_manager import WorkflowManager

__all__ = [
    "ExperimentPipeline",
    "WorkflowManager",
    "run_experiment",
]
