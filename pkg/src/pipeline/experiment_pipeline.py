"""
Experiment Pipeline for Annuli

Orchestrates one experiment run end to end: lattice setup, kernel
tabulation, agent execution and artifact emission.
"""

import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

from .. import __version__
from ..agents import AGENT_REGISTRY
from ..models.smoothing import build_kernel
from ..utils.config_loader import PIPELINE_LOGGER, ExperimentConfig
from ..utils.report_formatter import (
    format_report,
    format_summary,
    write_csv,
    write_histogram_svg,
    write_report_json,
)
from .workflow_manager import WorkflowManager

# experiments that evaluate smoothed remainders
KERNEL_EXPERIMENTS = ("variance", "moments", "distribution", "unsmoothing")


class ExperimentPipeline:
    """
    Main pipeline orchestrator for annuli experiments.

    Coordinates:
    1. Lattice setup
    2. Kernel tabulation (smoothed experiments only)
    3. Agent execution
    4. Report and artifact emission
    """

    def __init__(
        self,
        config: ExperimentConfig,
        logger: Optional[logging.Logger] = None
    ):
        """
        Initialize the pipeline.

        Args:
            config: Resolved experiment configuration
            logger: Optional logger instance
        """
        self.config = config
        self.logger = logger or self._setup_logger()
        self.workflow_manager = WorkflowManager()
        self.agent = AGENT_REGISTRY[config.experiment](logger=self.logger)
        self.logger.info(f"{self.agent.name} initialized for experiment '{config.experiment}'")

    def _setup_logger(self) -> logging.Logger:
        """Set up logger for the pipeline."""
        logger = logging.getLogger(PIPELINE_LOGGER)
        if not logger.handlers:
            handler = logging.StreamHandler()
            formatter = logging.Formatter(
                '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
            )
            handler.setFormatter(formatter)
            logger.addHandler(handler)
            logger.setLevel(logging.INFO)
        return logger

    def run(self, write: bool = True) -> Dict[str, Any]:
        """
        Run the configured experiment.

        Args:
            write: Emit report.json and the optional CSV/SVG artifacts

        Returns:
            Dictionary containing:
                - 'report': The report dictionary written to report.json
                - 'passed': Whether every tolerance check passed
                - 'status': Agent status (success or checks_failed)
                - 'artifacts': Paths of written files
                - 'agent_output': Raw agent output
        """
        start_time = datetime.now()
        report_config = self.config.to_dict(include_runtime=False)
        workflow_id = self.workflow_manager.create_workflow(report_config)

        try:
            self.logger.info(f"Starting experiment '{self.config.experiment}' (workflow: {workflow_id})")

            # Step 1: Lattice
            self.logger.info("Step 1: Lattice setup")
            lattice = self.config.lattice()
            self.logger.info(f"Lattice α = {lattice.alpha:.17g} (d = {lattice.det_d:.6g})")

            # Step 2: Kernel
            kernel = None
            if self.config.experiment in KERNEL_EXPERIMENTS:
                self.logger.info("Step 2: Kernel tabulation")
                kernel = build_kernel(self.config.grid_points)
            else:
                self.logger.info("Step 2: Kernel not needed")

            # Step 3: Agent
            self.logger.info(f"Step 3: {self.agent.name}")
            self.workflow_manager.update_workflow(workflow_id, 'running')
            agent_input = {
                'config': self.config,
                'lattice': lattice,
                'kernel': kernel,
                'on_progress': self.workflow_manager.progress_callback(workflow_id),
            }
            output = self.agent.execute(agent_input)
            metadata = output['_metadata']
            if metadata['status'] == 'error':
                reason = metadata.get('error') or metadata.get('validation', {}).get('errors')
                raise RuntimeError(f"{self.agent.name} failed: {reason}")

            report = format_report(
                self.config.experiment,
                report_config,
                output['results'],
                output['checks'],
                {
                    'workflow_id': workflow_id,
                    'pipeline_version': __version__,
                    'timestamp': datetime.now().isoformat(),
                },
            )

            # Step 4: Artifacts
            artifacts = {}
            if write:
                self.logger.info("Step 4: Writing artifacts")
                artifacts = self._write_artifacts(report, output, kernel)

            status = metadata['status']
            self.workflow_manager.complete_workflow(workflow_id, status)
            processing_time = (datetime.now() - start_time).total_seconds()
            self.logger.info(f"Experiment finished ({status}) in {processing_time:.2f}s")
            self.logger.info("\n" + format_summary(report))

            return {
                'report': report,
                'passed': report['passed'],
                'status': status,
                'artifacts': artifacts,
                'agent_output': output,
            }

        except Exception as e:
            self.logger.error(f"Pipeline failed: {str(e)}")
            self.workflow_manager.complete_workflow(workflow_id, 'error', str(e))
            raise

    def _write_artifacts(self, report: Dict[str, Any], output: Dict[str, Any], kernel) -> Dict[str, str]:
        out_dir = Path(self.config.out_dir)
        artifacts = {'report': str(write_report_json(report, out_dir))}

        for name, frame in (output.get('tables') or {}).items():
            if name == 'samples' or self.config.write_spectrum:
                artifacts[name] = str(write_csv(frame, out_dir / f"{name}.csv"))

        if kernel is not None and self.config.write_spectrum:
            artifacts['kernel'] = str(write_csv(kernel.to_frame(), out_dir / "kernel.csv"))

        if output.get('histogram') is not None:
            title = f"{self.config.experiment}: α = {self.config.alpha}, L = {self.config.L:g}"
            artifacts['histogram'] = str(write_histogram_svg(output['histogram'], out_dir / "histogram.svg", title))

        for name, path in artifacts.items():
            self.logger.info(f"  {name}: {path}")
        return artifacts

    def get_status(self) -> Dict[str, Any]:
        """Get pipeline status."""
        return {
            'agent': self.agent.get_status(),
            'workflows': self.workflow_manager.get_statistics()
        }


def run_experiment(config: ExperimentConfig, logger: Optional[logging.Logger] = None, write: bool = True) -> Dict[str, Any]:
    """Run one experiment through a fresh pipeline."""
    return ExperimentPipeline(config, logger).run(write=write)
