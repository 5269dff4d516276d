"""
Tests for the experiment pipeline, workflow bookkeeping and agents.
"""

import json

import pytest

from src.agents import AGENT_REGISTRY, BaseAgent
from src.pipeline import ExperimentPipeline, WorkflowManager, run_experiment
from src.pipeline.workflow_manager import workflow_id_for
from src.utils.config_loader import EXPERIMENTS, resolve_config
from src.utils.errors import ResourceError, UsageError
from src.utils.report_formatter import report_digest


def small_spectrum(out_dir, **overrides):
    return resolve_config("spectrum", {}, {
        "out_dir": str(out_dir),
        "options": {"cutoff": 400.0, "pair_radii": [50.0, 100.0, 200.0], "pair_delta": 0.5},
        **overrides,
    })


def small_moments(out_dir, threads):
    return resolve_config("moments", {}, {
        "out_dir": str(out_dir),
        "T": 2000.0,
        "L": 10.0,
        "n_samples": 2000,
        "threads": threads,
        "options": {"max_order": 4},
        "write_samples": True,
        "write_histogram": True,
    })


class TestExperimentPipeline:
    def test_registry_covers_experiments(self):
        assert set(AGENT_REGISTRY) == set(EXPERIMENTS)

    def test_spectrum_run(self, tmp_path, quiet_logger):
        outcome = run_experiment(small_spectrum(tmp_path), quiet_logger)
        assert outcome["passed"]
        assert outcome["status"] == "success"
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["experiment"] == "spectrum"
        assert report["passed"] is True
        assert "threads" not in report["config"]
        assert report["metadata"]["workflow_id"] == workflow_id_for(report["config"])
        assert (tmp_path / "spectrum.csv").exists()
        assert (tmp_path / "pairs.csv").exists()

    def test_tables_suppressed(self, tmp_path, quiet_logger):
        outcome = run_experiment(small_spectrum(tmp_path, write_spectrum=False), quiet_logger)
        assert set(outcome["artifacts"]) == {"report"}
        assert not (tmp_path / "spectrum.csv").exists()

    def test_no_write(self, tmp_path, quiet_logger):
        outcome = run_experiment(small_spectrum(tmp_path / "unused"), quiet_logger, write=False)
        assert outcome["artifacts"] == {}
        assert not (tmp_path / "unused").exists()

    def test_report_is_deterministic(self, tmp_path, quiet_logger):
        config = small_spectrum(tmp_path)
        first = run_experiment(config, quiet_logger)["report"]
        second = run_experiment(config, quiet_logger)["report"]
        assert report_digest(first) == report_digest(second)

    def test_multiplicity_violations_fail_checks(self, tmp_path, quiet_logger):
        outcome = run_experiment(small_spectrum(tmp_path, alpha="one"), quiet_logger)
        assert not outcome["passed"]
        assert outcome["status"] == "checks_failed"
        assert outcome["report"]["results"]["multiplicity_violations"] > 0

    def test_zeta_check(self, tmp_path, quiet_logger):
        config = resolve_config("zeta_check", {}, {
            "out_dir": str(tmp_path),
            "options": {"random_points": 2},
        })
        report = run_experiment(config, quiet_logger)["report"]
        assert report["results"]["functional_equation"]["residual"] <= 1e-8
        assert (tmp_path / "zeta.csv").exists()

    def test_moments_thread_independent(self, tmp_path, quiet_logger):
        one = run_experiment(small_moments(tmp_path / "one", 1), quiet_logger)["report"]
        two = run_experiment(small_moments(tmp_path / "two", 2), quiet_logger)["report"]
        one["config"].pop("out_dir")
        two["config"].pop("out_dir")
        one["metadata"].pop("workflow_id")
        two["metadata"].pop("workflow_id")
        assert report_digest(one) == report_digest(two)
        assert (tmp_path / "one" / "samples.csv").exists()
        assert (tmp_path / "one" / "histogram.svg").exists()
        assert (tmp_path / "one" / "kernel.csv").exists()

    def test_variance_reports_trend_and_readings(self, tmp_path, quiet_logger):
        config = resolve_config("variance", {}, {
            "T": 2000.0,
            "L": 10.0,
            "n_samples": 2000,
            "options": {"d_sum_orders": [2, 3], "sigma2_trend_L": [10.0, 20.0]},
        })
        report = run_experiment(config, quiet_logger, write=False)["report"]
        results = report["results"]
        checks = {check["name"]: check for check in report["checks"]}
        assert set(checks) == {"sigma2_trend_rising", "sigma2_trend_below_leading", "d2_identity", "variance_ratio"}
        assert checks["d2_identity"]["passed"]
        assert set(results["sigma2_ratio_trend"]) == {"10", "20"}
        assert all(0.0 < ratio < 1.0 for ratio in results["sigma2_ratio_trend"].values())
        assert results["d2_readings"]["scaled"] == pytest.approx(1.0, rel=1e-6)
        assert results["d2_readings"]["literal"] > 0
        assert results["variance_ratio_asymptotic"] == pytest.approx(
            results["variance_ratio_theoretical"] * results["sigma2_ratio"], rel=1e-12)

    def test_unsmoothing_reports_gap_constants(self, tmp_path, quiet_logger):
        config = resolve_config("unsmoothing", {}, {
            "out_dir": str(tmp_path),
            "T": 2000.0,
            "L": 10.0,
            "n_samples": 500,
            "options": {"M_values": [100.0, 1000.0]},
        })
        report = run_experiment(config, quiet_logger)["report"]
        results = report["results"]
        assert [check["name"] for check in report["checks"]] == ["gap_ratio", "gap_constant_stability"]
        assert results["gap_constants"] == pytest.approx(
            [gap * M ** 0.5 for gap, M in zip(results["gaps"], results["M_values"])], rel=1e-12)
        assert results["gap_constant_stability"] == pytest.approx(
            results["gap_constant_doubled_T"] / results["gap_constant"], rel=1e-12)
        assert (tmp_path / "unsmoothing.csv").exists()

    def test_moments_check_third_moment_against_diagonal_sum(self, tmp_path, quiet_logger):
        report = run_experiment(small_moments(tmp_path, 1), quiet_logger, write=False)["report"]
        results = report["results"]
        checks = {check["name"]: check for check in report["checks"]}
        assert "m3_abs" not in checks
        m3 = results["moments"]["3"]
        assert checks["m3_vs_diagonal"]["value"] == pytest.approx(abs(abs(m3["empirical"]) - results["d3_prediction"]))
        assert checks["m3_vs_diagonal"]["upper"] == pytest.approx(results["m3_allowance"])
        assert results["d3_prediction"] >= 0

    def test_budget_error_propagates(self, tmp_path, quiet_logger):
        config = small_spectrum(tmp_path, max_vectors=10)
        with pytest.raises(ResourceError):
            ExperimentPipeline(config, quiet_logger).run()

    def test_status(self, tmp_path, quiet_logger):
        pipeline = ExperimentPipeline(small_spectrum(tmp_path), quiet_logger)
        pipeline.run(write=False)
        status = pipeline.get_status()
        assert status["agent"]["status"] == "completed"
        assert status["workflows"]["success"] == 1
        assert status["workflows"]["active_workflows"] == 0


class TestWorkflowManager:
    def test_lifecycle(self):
        manager = WorkflowManager()
        workflow_id = manager.create_workflow({"experiment": "spectrum", "seed": 0}, total=10)
        assert workflow_id == workflow_id_for({"seed": 0, "experiment": "spectrum"})
        manager.update_workflow(workflow_id, "running")
        callback = manager.progress_callback(workflow_id)
        callback(4)
        callback(6)
        assert manager.get_workflow(workflow_id)["progress"] == 10
        manager.complete_workflow(workflow_id, "checks_failed")
        stats = manager.get_statistics()
        assert stats["total"] == 1
        assert stats["checks_failed"] == 1
        assert stats["active_workflows"] == 0

    def test_error_recorded(self):
        manager = WorkflowManager()
        workflow_id = manager.create_workflow({"experiment": "variance"})
        manager.complete_workflow(workflow_id, "error", "boom")
        assert manager.get_workflow(workflow_id)["error"] == "boom"
        assert manager.get_workflow("missing") is None

    def test_ids_differ_by_config(self):
        assert workflow_id_for({"seed": 1}) != workflow_id_for({"seed": 2})


class FailingAgent(BaseAgent):
    def __init__(self, error):
        super().__init__("FailingAgent")
        self.error = error

    def process(self, input_data):
        raise self.error


class IncompleteAgent(BaseAgent):
    def __init__(self):
        super().__init__("IncompleteAgent")

    def process(self, input_data):
        return {"results": {}}


class TestBaseAgent:
    def test_unexpected_error_in_metadata(self):
        agent = FailingAgent(ValueError("bad value"))
        output = agent.execute({})
        assert output["_metadata"]["status"] == "error"
        assert output["_metadata"]["error"] == "bad value"
        assert agent.get_status()["last_error"] == "bad value"

    def test_annuli_errors_propagate(self):
        agent = FailingAgent(UsageError("bad flag"))
        with pytest.raises(UsageError):
            agent.execute({})
        assert agent.status == "error"

    def test_validation(self):
        output = IncompleteAgent().execute({})
        assert output["_metadata"]["status"] == "error"
        assert "Missing required key: checks" in output["_metadata"]["validation"]["errors"]

    def test_reset(self):
        agent = FailingAgent(ValueError("x"))
        agent.execute({})
        agent.reset()
        assert agent.get_status()["processing_count"] == 0
