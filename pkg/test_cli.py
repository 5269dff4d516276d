"""
Tests for the command-line entry point and its exit codes.
"""

import json

import pytest

from src.cli import EXIT_CHECKS_FAILED, EXIT_OK, EXIT_RESOURCE, EXIT_USAGE, build_parser, main

SMALL_CONFIG = """
logging:
  level: "WARNING"
experiments:
  spectrum:
    options:
      cutoff: 400.0
      pair_radii: [50.0, 100.0, 200.0]
      pair_delta: 0.5
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text(SMALL_CONFIG)
    return path


def run(config_file, tmp_path, *args):
    return main([*args, "--config", str(config_file), "--out", str(tmp_path / "out")])


class TestExitCodes:
    def test_success(self, config_file, tmp_path):
        assert run(config_file, tmp_path, "spectrum") == EXIT_OK
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        assert report["passed"] is True

    def test_failed_checks(self, config_file, tmp_path):
        assert run(config_file, tmp_path, "spectrum", "--alpha", "one") == EXIT_CHECKS_FAILED

    def test_zero_samples(self, config_file, tmp_path):
        assert run(config_file, tmp_path, "moments", "--samples", "0") == EXIT_USAGE

    def test_unknown_preset(self, config_file, tmp_path):
        assert run(config_file, tmp_path, "spectrum", "--alpha", "pi") == EXIT_USAGE

    def test_negative_width(self, config_file, tmp_path):
        assert run(config_file, tmp_path, "variance", "--L", "-3") == EXIT_USAGE

    def test_missing_config(self, tmp_path):
        assert main(["spectrum", "--config", str(tmp_path / "absent.yaml")]) == EXIT_USAGE

    def test_budget(self, tmp_path):
        path = tmp_path / "tight.yaml"
        path.write_text(SMALL_CONFIG + "defaults:\n  max_vectors: 10\n")
        assert run(path, tmp_path, "spectrum") == EXIT_RESOURCE

    def test_unknown_experiment(self):
        with pytest.raises(SystemExit) as exc:
            main(["sideways"])
        assert exc.value.code == 2


class TestParser:
    def test_flags(self):
        args = build_parser().parse_args(["variance", "--T", "5000", "--L", "20", "--samples", "100", "--threads", "2"])
        assert args.experiment == "variance"
        assert args.T == 5000.0
        assert args.L == 20.0
        assert args.n_samples == 100
        assert args.threads == 2
        assert args.progress is None
        assert args.M is None

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc:
            build_parser().parse_args(["--version"])
        assert exc.value.code == 0
        assert "annuli" in capsys.readouterr().out
