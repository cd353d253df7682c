"""
Tests for the command-line interface.

Tests cover:
- Reproducible synthesis
- Config errors and their exit codes
- Online runs (simulated and oracle) and report re-rendering
- Training and evaluation on a short session (slow)
"""

import json

import pytest

from bci.cli import build_parser, main
from bci.features import read_feature_table
from bci.pipeline import read_session_report
from core.config_manager import SNAPSHOT_NAME

SMALL = ["--set", "montage.n_scalp=8"]


def _run(tmp_path, *args: str) -> int:
    return main(["--data-dir", str(tmp_path), *SMALL, *args])


class TestParser:
    """Test argument parsing."""

    def test_command_required(self):
        """Test that a subcommand must be given."""
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_sources_are_exclusive(self):
        """Test that --replay and --simulate cannot be combined."""
        with pytest.raises(SystemExit):
            build_parser().parse_args(["run-online", "--replay", "x.eegr", "--simulate", "10"])

    def test_task_is_case_insensitive(self):
        """Test that the task flag accepts lower case."""
        args = build_parser().parse_args(["synth", "--task", "vi"])
        assert args.task == "VI"


class TestSynth:
    """Test the synth command."""

    def test_same_seed_gives_identical_files(self, tmp_path, capsys):
        """Test that two runs with the same seed write byte-identical containers."""
        first, second = tmp_path / "a.eegr", tmp_path / "b.eegr"
        assert _run(tmp_path, "synth", "--task", "mi", "--trials", "4", "--seed", "3", "-o", str(first)) == 0
        assert _run(tmp_path, "synth", "--task", "mi", "--trials", "4", "--seed", "3", "-o", str(second)) == 0
        assert first.read_bytes() == second.read_bytes()
        assert (tmp_path / SNAPSHOT_NAME).exists()
        assert "4 MI trials" in capsys.readouterr().out

    def test_default_output_under_data_dir(self, tmp_path):
        """Test that the default output lands in the data directory's output folder."""
        assert _run(tmp_path, "synth", "--task", "vi", "--trials", "3", "--seed", "5") == 0
        assert (tmp_path / "out" / "vi_seed5.eegr").exists()

    def test_online_script(self, tmp_path):
        """Test that --online writes an online run script."""
        assert _run(tmp_path, "synth", "--online", "--trials", "1", "--seed", "2") == 0
        assert (tmp_path / "out" / "online_seed2.eegr").exists()


class TestConfigErrors:
    """Test that configuration errors exit with code 2."""

    def test_out_of_range_override(self, tmp_path, capsys):
        """Test that an out-of-range value names its config path."""
        code = _run(tmp_path, "--set", "synth.separability=2.0", "synth")
        assert code == 2
        assert "synth.separability" in capsys.readouterr().err

    def test_out_of_range_flag(self, tmp_path):
        """Test that flags are validated like config values."""
        assert _run(tmp_path, "synth", "--separability", "2.0") == 2

    def test_missing_config_file(self, tmp_path):
        """Test that a missing --config file is a config error."""
        assert main(["--config", str(tmp_path / "absent.json"), "synth"]) == 2

    def test_models_required_without_oracle(self, tmp_path, capsys):
        """Test that run-online without models or --oracle is refused."""
        assert _run(tmp_path, "run-online", "--trials", "1") == 2
        assert "pipeline.vi_model" in capsys.readouterr().err

    def test_missing_input_file(self, tmp_path):
        """Test that a missing input exits with the I/O code."""
        assert _run(tmp_path, "report", str(tmp_path / "absent.json")) == 3


class TestRunOnline:
    """Test online runs and report rendering."""

    def test_simulate(self, tmp_path, capsys):
        """Test a signal-free Monte-Carlo run writes the report and snapshot."""
        out = tmp_path / "sim"
        assert _run(tmp_path, "run-online", "--simulate", "300", "--output-dir", str(out)) == 0
        report = read_session_report(out / "session_report.json")
        assert report.n_trials == 300
        assert (out / "session_report.txt").read_text() == capsys.readouterr().out
        assert json.loads((out / SNAPSHOT_NAME).read_text())["montage"]["n_scalp"] == 8

    @pytest.mark.integration
    def test_oracle(self, tmp_path):
        """Test an oracle run over a streamed synthetic script."""
        out = tmp_path / "oracle"
        assert _run(tmp_path, "run-online", "--oracle", "--trials", "2", "--output-dir", str(out)) == 0
        report = read_session_report(out / "session_report.json")
        assert report.n_trials == 2
        assert report.vi_accuracy == 1.0
        assert report.mi_accuracy == 1.0
        assert not report.partial

    @pytest.mark.integration
    def test_oracle_over_robot_bridge(self, tmp_path):
        """Test that bridged and in-process robots give the same report."""
        direct, bridged = tmp_path / "direct", tmp_path / "bridged"
        assert _run(tmp_path, "run-online", "--oracle", "--trials", "1", "--output-dir", str(direct)) == 0
        assert _run(tmp_path, "run-online", "--oracle", "--trials", "1", "--robot-bridge", "--output-dir", str(bridged)) == 0
        assert (direct / "session_report.txt").read_text() == (bridged / "session_report.txt").read_text()

    def test_report_rerender(self, tmp_path, capsys):
        """Test that the report command reproduces the saved text."""
        out = tmp_path / "sim"
        assert _run(tmp_path, "run-online", "--simulate", "50", "--output-dir", str(out)) == 0
        capsys.readouterr()
        copy = tmp_path / "copy.txt"
        assert _run(tmp_path, "report", str(out / "session_report.json"), "-o", str(copy)) == 0
        assert copy.read_text() == (out / "session_report.txt").read_text()
        assert capsys.readouterr().out == copy.read_text()


class TestModelProfiles:
    """Test that online runs refuse models trained under another frequency profile."""

    @pytest.fixture
    def models(self, tmp_path):
        """VI Ridge model at F40 and MI Ridge model at F100."""
        out = tmp_path / "train"
        for task, profile in (("vi", "F40"), ("mi", "F100")):
            session = tmp_path / f"{task}.eegr"
            assert _run(tmp_path, "synth", "--task", task, "--trials", "6", "--seed", "4", "-o", str(session)) == 0
            args = ["train", str(session), "--kinds", "Ridge", "--profiles", profile, "--output-dir", str(out)]
            assert _run(tmp_path, "--set", "preprocess.ica=false", *args) == 0
        return out / "models" / "vi_Ridge_F40.eegm", out / "models" / "mi_Ridge_F100.eegm"

    @pytest.mark.parametrize("profile", ["F40", "F60", "F100"])
    def test_mismatched_profile_rejected(self, tmp_path, capsys, models, profile):
        """Test that any session profile disagreeing with a model aborts before streaming."""
        vi_model, mi_model = models
        capsys.readouterr()
        code = _run(
            tmp_path,
            "run-online",
            "--vi-model",
            str(vi_model),
            "--mi-model",
            str(mi_model),
            "--profile",
            profile,
            "--trials",
            "1",
            "--output-dir",
            str(tmp_path / "online"),
        )
        assert code == 6
        assert f"Profile {profile} requires band" in capsys.readouterr().err
        assert not (tmp_path / "online" / "session_report.json").exists()


@pytest.mark.slow
class TestTrainAndEval:
    """Test training a small grid and evaluating a saved model."""

    def test_train_then_eval(self, tmp_path, capsys):
        """Test that train writes models and tables and eval reloads a model."""
        session = tmp_path / "mi.eegr"
        out = tmp_path / "train"
        assert _run(tmp_path, "synth", "--task", "mi", "--trials", "10", "--seed", "1", "-o", str(session)) == 0
        assert (
            _run(
                tmp_path,
                "train",
                str(session),
                "--kinds",
                "Ridge",
                "Mlp",
                "--profiles",
                "f40",
                "--epochs",
                "5",
                "--output-dir",
                str(out),
            )
            == 0
        )
        assert (out / "models" / "mi_Ridge_F40.eegm").exists()
        assert (out / "models" / "mi_F40_ica.npz").exists()
        features = read_feature_table(out / "mi_F40_features.eegf")
        assert features.columns[0] == "Fp1:Delta"
        assert features.matrix.shape[1] == len(features.columns) == 8 * 5
        grid = json.loads((out / "mi_grid.json").read_text())
        assert len(grid["cells"]) == 2
        assert "Trial-level accuracy (%)" in (out / "mi_accuracy.txt").read_text()

        capsys.readouterr()
        assert _run(tmp_path, "eval", str(out / "models" / "mi_Ridge_F40.eegm"), str(session)) == 0
        assert "Ridge/F40 on 10 MI trials" in capsys.readouterr().out
