import csv
import json

import pytest

from wayfarer import storage, trainer
from wayfarer.cli import (
    EXIT_OK,
    EXIT_RUNTIME,
    EXIT_USAGE,
    UsageError,
    default_seed,
    main,
    parse_waypoints,
)
from wayfarer.sim import POINT_MASS


@pytest.fixture(scope="module")
def tiny_config_path(tmp_path_factory):
    """Short-episode point-mass config so CLI train runs in well under a second."""
    cfg = trainer.make_train_config(
        5,
        agent_kind=POINT_MASS,
        n_iterations=2,
        episodes_per_batch=1,
        policy_hidden=[8],
        value_hidden=[8],
        checkpoint_every=0,
        episode_kwargs={"t_ep": 1.0},
    )
    path = tmp_path_factory.mktemp("cfg") / "tiny.json"
    storage.save_config(cfg, path)
    return path


@pytest.fixture(scope="module")
def trained_out(tiny_config_path, tmp_path_factory):
    out = tmp_path_factory.mktemp("trained")
    code = main(["train", "--config", str(tiny_config_path), "--seed", "3", "--out", str(out)])
    assert code == EXIT_OK
    return out


class TestParseWaypoints:
    def test_single(self):
        assert parse_waypoints("10,10") == [(10.0, 10.0)]

    def test_multiple_with_negatives(self):
        assert parse_waypoints("-1,-2;3.5,4") == [(-1.0, -2.0), (3.5, 4.0)]

    @pytest.mark.parametrize("bad", ["10", "1,2;3", "a,b", ";", ""])
    def test_malformed(self, bad):
        with pytest.raises(UsageError):
            parse_waypoints(bad)


class TestDefaultSeed:
    def test_unset_means_zero(self, monkeypatch):
        monkeypatch.delenv("WAYFARER_SEED", raising=False)
        assert default_seed() == 0

    def test_env_value(self, monkeypatch):
        monkeypatch.setenv("WAYFARER_SEED", "42")
        assert default_seed() == 42

    def test_non_integer_rejected(self, monkeypatch):
        monkeypatch.setenv("WAYFARER_SEED", "lots")
        with pytest.raises(UsageError):
            default_seed()


class TestExitCodes:
    def test_no_command(self, capsys):
        assert main([]) == EXIT_USAGE
        assert "error:" in capsys.readouterr().err

    def test_unknown_command(self):
        assert main(["frobnicate"]) == EXIT_USAGE

    def test_bad_variant_value(self, tmp_path):
        assert main(["train", "--variant", "9", "--out", str(tmp_path)]) == EXIT_USAGE

    def test_eval_missing_checkpoint(self, tmp_path):
        code = main(["eval", str(tmp_path / "nope.json"), "--out", str(tmp_path)])
        assert code == EXIT_USAGE

    def test_eval_corrupt_checkpoint(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{}")
        assert main(["eval", str(bad), "--out", str(tmp_path)]) == EXIT_USAGE

    def test_runtime_failure_is_two(self, trained_out, tmp_path, capsys):
        ckpt = trained_out / "checkpoints" / "latest.json"
        blocker = tmp_path / "blocked"
        blocker.write_text("not a directory")
        code = main(
            ["eval", str(ckpt), "--waypoints", "10,10", "--trials", "1", "--out", str(blocker)]
        )
        assert code == EXIT_RUNTIME
        assert "runtime error:" in capsys.readouterr().err


class TestTrain:
    def test_out_layout(self, trained_out):
        assert (trained_out / "config.json").exists()
        assert (trained_out / "metrics.csv").exists()
        assert (trained_out / "checkpoints" / "latest.json").exists()
        assert (trained_out / "checkpoints" / "ckpt_000002.json").exists()
        assert (trained_out / "plots" / "training.png").exists()

    def test_config_json_records_resolved_settings(self, trained_out):
        cfg = storage.load_config(trained_out / "config.json")
        assert cfg.seed == 3
        assert cfg.n_iterations == 2
        assert cfg.episode.t_ep == 1.0

    def test_metrics_rows(self, trained_out):
        with open(trained_out / "metrics.csv", newline="") as f:
            rows = list(csv.reader(f))
        assert len(rows) == 3

    def test_same_flags_reproduce_checkpoint(self, tiny_config_path, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            code = main(["train", "--config", str(tiny_config_path), "--seed", "7", "--out", str(out)])
            assert code == EXIT_OK
        text_a = (a / "checkpoints" / "latest.json").read_text()
        text_b = (b / "checkpoints" / "latest.json").read_text()
        assert text_a == text_b

    def test_variant_flag_overrides_config(self, tiny_config_path, tmp_path):
        code = main(
            [
                "train",
                "--config",
                str(tiny_config_path),
                "--variant",
                "2",
                "--iterations",
                "1",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == EXIT_OK
        cfg = storage.load_config(tmp_path / "config.json")
        assert cfg.variant_id == 2
        assert cfg.episode.observation_dim == 10

    def test_env_seed_used_when_flag_absent(self, tiny_config_path, tmp_path, monkeypatch):
        monkeypatch.setenv("WAYFARER_SEED", "99")
        code = main(["train", "--config", str(tiny_config_path), "--out", str(tmp_path)])
        assert code == EXIT_OK
        assert storage.load_config(tmp_path / "config.json").seed == 99

    def test_bad_env_seed_rejected(self, tiny_config_path, tmp_path, monkeypatch):
        monkeypatch.setenv("WAYFARER_SEED", "many")
        code = main(["train", "--config", str(tiny_config_path), "--out", str(tmp_path)])
        assert code == EXIT_USAGE


class TestEval:
    def test_custom_waypoints_report(self, trained_out, tmp_path, capsys):
        ckpt = trained_out / "checkpoints" / "latest.json"
        code = main(
            [
                "eval",
                str(ckpt),
                "--waypoints",
                "10,10",
                "--trials",
                "2",
                "--deterministic",
                "--no-plots",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "custom_10x10" in out
        with open(tmp_path / "reports.csv", newline="") as f:
            rows = list(csv.reader(f))
        assert rows[1][0] == "custom_10x10"
        assert rows[1][1] == "2"
        assert (tmp_path / "traj" / "custom_10x10_trial00.csv").exists()
        assert (tmp_path / "traj" / "custom_10x10_trial01.csv").exists()

    def test_plots_rendered_by_default(self, trained_out, tmp_path):
        ckpt = trained_out / "checkpoints" / "latest.json"
        code = main(
            ["eval", str(ckpt), "--waypoints", "10,10", "--trials", "1", "--out", str(tmp_path)]
        )
        assert code == EXIT_OK
        assert (tmp_path / "plots" / "custom_10x10.png").exists()

    def test_export_traj_overrides_directory(self, trained_out, tmp_path):
        ckpt = trained_out / "checkpoints" / "latest.json"
        custom = tmp_path / "somewhere"
        code = main(
            [
                "eval",
                str(ckpt),
                "--waypoints",
                "8,8",
                "--trials",
                "1",
                "--no-plots",
                "--export-traj",
                str(custom),
                "--out",
                str(tmp_path),
            ]
        )
        assert code == EXIT_OK
        assert (custom / "custom_8x8_trial00.csv").exists()

    def test_unknown_suite(self, trained_out, tmp_path):
        ckpt = trained_out / "checkpoints" / "latest.json"
        code = main(["eval", str(ckpt), "--suite", "fancy", "--out", str(tmp_path)])
        assert code == EXIT_USAGE

    def test_bad_waypoints_flag(self, trained_out, tmp_path):
        ckpt = trained_out / "checkpoints" / "latest.json"
        code = main(["eval", str(ckpt), "--waypoints", "1;2", "--out", str(tmp_path)])
        assert code == EXIT_USAGE


class TestServe:
    def test_missing_console_dir(self, trained_out, tmp_path):
        ckpt = trained_out / "checkpoints" / "latest.json"
        code = main(["serve", str(ckpt), "--console-dir", str(tmp_path / "nope")])
        assert code == EXIT_USAGE


class TestInspect:
    def test_summary_fields(self, trained_out, capsys):
        ckpt = trained_out / "checkpoints" / "latest.json"
        assert main(["inspect", str(ckpt)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "variant:     5" in out
        assert "agent:       point_mass" in out or "agent:" in out
        assert "iteration:   2" in out
        assert "observation: 14  action: 2" in out

    def test_inspect_missing_file(self, tmp_path):
        assert main(["inspect", str(tmp_path / "gone.json")]) == EXIT_USAGE
