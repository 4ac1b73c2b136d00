"""Config parsing, command outputs, error classes, and exit codes."""

import json

import numpy as np
import pytest

from heavelab import cli
from heavelab.cli import CONFIG_SCHEMA, ConfigError, load_config, parse_config_text
from heavelab.ddpg import load_agent
from heavelab.seaway import TimeSeries


def write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


TINY_TRAIN = """
sea.duration = 40
agent.episodes = 2
agent.steps = 50
agent.batch = 16
agent.buffer = 400
"""


def test_defaults_cover_every_key():
    config = load_config(None)
    assert set(config) == set(CONFIG_SCHEMA)
    assert config["seed"] == 0
    assert config["sea.hs"] == 4.0
    assert config["agent.episodes"] == 150
    assert config["noise.s0"] == 0.0


def test_parse_config_text_comments_and_blanks():
    pairs = parse_config_text("# note\n\nsea.hs = 5.5  # tall\nseed=3\n")
    assert pairs == {"sea.hs": "5.5", "seed": "3"}


def test_parse_config_text_rejects_bare_words():
    with pytest.raises(ConfigError) as err:
        parse_config_text("sea.hs 5.5\n")
    assert "line 1" in str(err.value)


def test_load_config_types_and_overrides(tmp_path):
    path = write_config(
        tmp_path,
        "sea.hs = 6\nagent.batch = 64\nsea.jitter = off\nplant.gravity = 1\n",
    )
    config = load_config(path)
    assert config["sea.hs"] == 6.0 and isinstance(config["sea.hs"], float)
    assert config["agent.batch"] == 64 and isinstance(config["agent.batch"], int)
    assert config["sea.jitter"] is False
    assert config["plant.gravity"] is True


def test_load_config_lists_unknown_keys(tmp_path):
    path = write_config(tmp_path, "sea.hss = 6\nagent.batchsize = 64\n")
    with pytest.raises(ConfigError) as err:
        load_config(path)
    message = str(err.value)
    assert "agent.batchsize" in message and "sea.hss" in message


def test_load_config_rejects_bad_values(tmp_path):
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, "sea.hs = tall\n"))
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, "sea.jitter = maybe\n"))
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, "agent.batch = 12.5\n"))


def test_main_reports_missing_config_file(tmp_path, capsys):
    rc = cli.main(
        ["synth", "--config", str(tmp_path / "nope.cfg"), "--out", str(tmp_path / "o")]
    )
    assert rc == 1
    err = capsys.readouterr().err
    assert err.startswith("io-error: ")
    assert err.count("\n") == 1


def test_main_reports_unknown_key_as_config_error(tmp_path, capsys):
    config = write_config(tmp_path, "sea.wavyness = 9\n")
    rc = cli.main(["synth", "--config", config, "--out", str(tmp_path / "o")])
    assert rc == 1
    assert capsys.readouterr().err.startswith("config-error: ")


def test_synth_writes_series_rao_and_manifest(tmp_path, capsys):
    config = write_config(tmp_path, "sea.duration = 20\n")
    out = tmp_path / "synth"
    rc = cli.main(["synth", "--config", config, "--seed", "9", "--out", str(out)])
    assert rc == 0
    assert capsys.readouterr().out.startswith("synth:")
    names = {
        "wave.csv",
        "heave.csv",
        "roll.csv",
        "pitch.csv",
        "winch_heave.csv",
        "winch_heave_rate.csv",
        "rao.csv",
        "manifest.json",
    }
    assert names <= {p.name for p in out.iterdir()}
    wave = TimeSeries.from_csv(out / "wave.csv")
    assert len(wave.values) == 201
    assert wave.dt == 0.1
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 9
    assert manifest["command"] == "synth"
    assert manifest["config"]["sea.duration"] == 20.0
    assert sorted(manifest["artifacts"]) == manifest["artifacts"]
    assert set(manifest["artifacts"]) == names
    assert manifest["tool"].startswith("heavelab ")


def test_synth_seed_flag_controls_realization(tmp_path):
    config = write_config(tmp_path, "sea.duration = 20\n")
    outs = []
    for tag, seed in (("a", 3), ("b", 3), ("c", 4)):
        out = tmp_path / tag
        assert cli.main(["synth", "--config", config, "--seed", str(seed), "--out", str(out)]) == 0
        outs.append((out / "wave.csv").read_bytes())
    assert outs[0] == outs[1]
    assert outs[0] != outs[2]


def test_synth_combines_motions_with_crane_arms(tmp_path):
    config = write_config(tmp_path, "sea.duration = 20\n")
    out = tmp_path / "synth"
    cli.main(["synth", "--config", config, "--out", str(out)])
    heave = TimeSeries.from_csv(out / "heave.csv").values
    roll = TimeSeries.from_csv(out / "roll.csv").values
    pitch = TimeSeries.from_csv(out / "pitch.csv").values
    z_winch = TimeSeries.from_csv(out / "winch_heave.csv").values
    arms = cli.CraneGeometry()
    expected = (heave + arms.roll_arm * roll) + arms.pitch_arm * pitch
    np.testing.assert_array_equal(z_winch, expected)


def test_eval_pd_outputs_and_metrics(tmp_path, capsys):
    config = write_config(tmp_path, "scenario.duration = 30\n")
    out = tmp_path / "eval"
    rc = cli.main(["eval", "--config", config, "--out", str(out)])
    assert rc == 0
    assert "compensation" in capsys.readouterr().out
    for name in (
        "results.csv",
        "uncompensated.csv",
        "compensated.csv",
        "payout.csv",
        "command.csv",
        "swash.csv",
        "psd_uncompensated.csv",
        "psd_compensated.csv",
        "manifest.json",
    ):
        assert (out / name).exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert "comp_percent" in manifest and "sat_fraction" in manifest
    assert "snr_db" not in manifest
    header = (out / "results.csv").read_text().splitlines()[0]
    assert header == (
        "scenario,controller,Hs,Tp,comp_percent,rms_uncomp,rms_comp,"
        "sat_fraction,seed"
    )


def test_eval_reports_snr_when_noise_enabled(tmp_path):
    config = write_config(
        tmp_path, "scenario.duration = 30\nnoise.s0 = 1e-6\n"
    )
    out = tmp_path / "eval"
    assert cli.main(["eval", "--config", config, "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert "snr_db" in manifest


def test_eval_rl_without_checkpoint_is_value_error(tmp_path, capsys):
    config = write_config(tmp_path, "scenario.controller = rl\nscenario.duration = 20\n")
    rc = cli.main(["eval", "--config", config, "--out", str(tmp_path / "o")])
    assert rc == 1
    assert capsys.readouterr().err.startswith("value-error: ")


def test_eval_missing_checkpoint_is_io_error(tmp_path, capsys):
    config = write_config(tmp_path, "scenario.controller = rl\nscenario.duration = 20\n")
    rc = cli.main(
        [
            "eval",
            "--config",
            config,
            "--out",
            str(tmp_path / "o"),
            "--checkpoint",
            str(tmp_path / "ghost.ckpt"),
        ]
    )
    assert rc == 1
    assert capsys.readouterr().err.startswith("io-error: ")


def test_eval_unknown_rao_source_is_config_error(tmp_path, capsys):
    config = write_config(tmp_path, "rao.source = measured\nscenario.duration = 20\n")
    rc = cli.main(["eval", "--config", config, "--out", str(tmp_path / "o")])
    assert rc == 1
    assert capsys.readouterr().err.startswith("config-error: ")


def test_eval_reads_rao_table_from_csv(tmp_path):
    config_a = write_config(tmp_path, "sea.duration = 20\n", name="synth.cfg")
    synth_out = tmp_path / "synth"
    cli.main(["synth", "--config", config_a, "--out", str(synth_out)])
    config_b = write_config(
        tmp_path,
        "scenario.duration = 30\nrao.source = csv\nrao.path = %s\n"
        % (synth_out / "rao.csv"),
        name="eval.cfg",
    )
    out = tmp_path / "eval"
    assert cli.main(["eval", "--config", config_b, "--out", str(out)]) == 0


def test_train_tiny_run_end_to_end(tmp_path, capsys):
    config = write_config(tmp_path, TINY_TRAIN)
    out = tmp_path / "train"
    rc = cli.main(["train", "--config", config, "--seed", "11", "--out", str(out)])
    assert rc == 0
    stdout = capsys.readouterr().out
    assert "episode   1/2" in stdout
    assert "train: 2 episodes" in stdout
    log_lines = (out / "training_log.csv").read_text().splitlines()
    assert log_lines[0] == "episode,total_reward,rolling_mean_30"
    assert len(log_lines) == 3
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["train_seconds"] > 0.0
    assert "final_rolling_mean_30" in manifest
    agent = load_agent(out / "agent.ckpt")
    assert agent.config.episodes == 2
    assert agent.config.steps_per_episode == 50


def test_train_respects_checkpoint_flag(tmp_path):
    config = write_config(tmp_path, TINY_TRAIN)
    out = tmp_path / "train"
    ckpt = tmp_path / "elsewhere" / "model.ckpt"
    ckpt.parent.mkdir()
    rc = cli.main(
        [
            "train",
            "--config",
            config,
            "--seed",
            "11",
            "--out",
            str(out),
            "--checkpoint",
            str(ckpt),
        ]
    )
    assert rc == 0
    assert ckpt.exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["checkpoint"] == str(ckpt)
    assert "model.ckpt" not in manifest["artifacts"]


def test_train_short_reference_is_value_error(tmp_path, capsys):
    config = write_config(tmp_path, "sea.duration = 20\n")
    rc = cli.main(["train", "--config", config, "--out", str(tmp_path / "o")])
    assert rc == 1
    err = capsys.readouterr().err
    assert err.startswith("value-error: ")
    assert "shorter than an episode" in err


def test_train_reference_start_slices_history(tmp_path):
    config = write_config(
        tmp_path, TINY_TRAIN + "train.reference_start = 30\n"
    )
    out = tmp_path / "train"
    rc = cli.main(["train", "--config", config, "--seed", "2", "--out", str(out)])
    assert rc == 0
    late = write_config(
        tmp_path, TINY_TRAIN + "train.reference_start = 39\n", name="late.cfg"
    )
    rc = cli.main(["train", "--config", late, "--out", str(tmp_path / "o2")])
    assert rc == 1


def test_compare_without_checkpoint_is_value_error(tmp_path, capsys):
    rc = cli.main(["compare", "--out", str(tmp_path / "o")])
    assert rc == 1
    assert capsys.readouterr().err.startswith("value-error: ")


def test_compare_runs_all_sea_states(tmp_path, capsys):
    config = write_config(tmp_path, TINY_TRAIN)
    train_out = tmp_path / "train"
    assert (
        cli.main(["train", "--config", config, "--seed", "1", "--out", str(train_out)])
        == 0
    )
    capsys.readouterr()
    compare_config = write_config(tmp_path, "scenario.duration = 30\n", name="cmp.cfg")
    out = tmp_path / "compare"
    rc = cli.main(
        [
            "compare",
            "--config",
            compare_config,
            "--out",
            str(out),
            "--checkpoint",
            str(train_out / "agent.ckpt"),
        ]
    )
    assert rc == 0
    stdout = capsys.readouterr().out
    rows = (out / "results.csv").read_text().splitlines()
    assert len(rows) == 9
    names = [row.split(",")[0] for row in rows[1:]]
    assert names == [
        "slight",
        "slight",
        "moderate",
        "moderate",
        "rough",
        "rough",
        "very_rough",
        "very_rough",
    ]
    controllers = [row.split(",")[1] for row in rows[1:]]
    assert controllers == ["pd", "rl"] * 4
    assert "very_rough" in stdout


def test_default_out_directory_is_runs_command(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    config = write_config(tmp_path, "sea.duration = 20\n")
    assert cli.main(["synth", "--config", config]) == 0
    assert (tmp_path / "runs" / "synth" / "wave.csv").exists()


def test_manifest_written_last(tmp_path):
    config = write_config(tmp_path, "sea.duration = 20\n")
    out = tmp_path / "synth"
    cli.main(["synth", "--config", config, "--out", str(out)])
    manifest = json.loads((out / "manifest.json").read_text())
    for name in manifest["artifacts"]:
        assert (out / name).exists()
