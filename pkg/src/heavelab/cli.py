"""Command line entry points and flat-file configuration.

Configuration files are plain text, one ``section.key = value`` per
line, with # comments.  Every key has a default; unknown keys are
itemized in the error so typos cannot silently fall back.  The single
``seed`` key is the master seed: each command splits it into fixed
per-consumer streams (sea realization, disturbance, reference noise,
reference-rate noise, environment resets, agent), so two commands that
share a seed also share the streams they have in common.

Subcommands:

    synth     sea state, vessel motions, and winch-heave reference CSVs
    train     reinforcement-learning training run with log + checkpoint
    eval      one closed-loop scenario with series, PSDs, and metrics
    compare   PD versus trained agent across the four sea states

Each command writes a ``manifest.json`` (tool version, resolved config,
seed, artifact list, timestamps) into the output directory, last, so a
manifest never references a missing file.  Failures exit nonzero after
printing one line to stderr of the form ``<error-class>: <detail>``;
the classes are config-error, io-error, value-error, metric-error, and
training-error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, ddpg, evalkit
from .pid import PdGains
from .plant import WinchParams, WinchPlant, winch_params_from_file
from .seaway import ConstantBand, PiersonMoskowitz, TimeSeries, discretize, synthesize
from .vessel import (
    CraneGeometry,
    DofResponse,
    RaoParams,
    motion_rate,
    net_winch_heave,
    parametric_rao,
    read_rao_csv,
    vessel_motions,
    write_rao_csv,
)


class ConfigError(Exception):
    pass


class CliError(Exception):
    """Command failure with a machine-readable class token."""

    def __init__(self, token: str, message: str):
        super().__init__(message)
        self.token = token


_B = "bool"
_F = "float"
_I = "int"
_S = "str"

# key -> (type, default)
CONFIG_SCHEMA = {
    "seed": (_I, 0),
    "sea.hs": (_F, 4.0),
    "sea.tp": (_F, 9.0),
    "sea.duration": (_F, 10000.0),
    "sea.dt": (_F, 0.1),
    "sea.heading": (_F, 135.0),
    "sea.jitter": (_B, True),
    "sea.components": (_I, 0),  # 0 = cover the spectrum support
    "crane.x": (_F, -1.5),
    "crane.y": (_F, 2.0),
    "crane.boom": (_F, 3.0),
    "crane.slew": (_F, 30.0),
    "rao.source": (_S, "parametric"),  # parametric | csv
    "rao.path": (_S, ""),
    "rao.heave.gain": (_F, 1.0),
    "rao.heave.omega": (_F, 0.30),
    "rao.heave.zeta": (_F, 0.50),
    "rao.roll.gain": (_F, 0.05),
    "rao.roll.omega": (_F, 0.19),
    "rao.roll.zeta": (_F, 0.08),
    "rao.pitch.gain": (_F, 0.025),
    "rao.pitch.omega": (_F, 0.55),
    "rao.pitch.zeta": (_F, 0.40),
    "plant.g": (_F, 9.8),
    "plant.K_oil": (_F, 1.8e9),
    "plant.V_c": (_F, 2e-3),
    "plant.D_p": (_F, 40e-6),
    "plant.D_m": (_F, 4e-6),
    "plant.omega_p": (_F, 45.0),
    "plant.k1_p": (_F, 0.0),
    "plant.k1_m": (_F, 0.0),
    "plant.T_w": (_F, 1.0),
    "plant.k": (_F, 200.0),
    "plant.r": (_F, 0.5),
    "plant.eta_m": (_F, 0.65),
    "plant.J_w": (_F, 150.0),
    "plant.b": (_F, 1e4),
    "plant.m": (_F, 1000.0),
    "plant.substep": (_F, 1e-3),
    "plant.gravity": (_B, True),
    "plant.overrides": (_S, ""),  # optional flat symbol=value file
    "pd.kp": (_F, 5.86),
    "pd.kd": (_F, 5.46),
    "pd.tf": (_F, 0.03),
    "agent.gamma": (_F, 0.998),
    "agent.tau": (_F, 0.005),
    "agent.lr_actor": (_F, 1e-3),
    "agent.lr_critic": (_F, 2e-3),
    "agent.batch": (_I, 128),
    "agent.buffer": (_I, 50000),
    "agent.episodes": (_I, 150),
    "agent.steps": (_I, 3000),
    "agent.ou_theta": (_F, 0.15),
    "agent.ou_mu": (_F, 0.0),
    "agent.ou_sigma": (_F, 5e-4),
    "agent.ou_dt": (_F, 1.0),
    "train.reference_start": (_F, 0.0),  # slice start into the history [s]
    "train.resample_reference": (_B, False),  # new slice every episode
    "train.checkpoint_every": (_I, 0),  # episodes between checkpoints
    "scenario.name": (_S, "custom"),
    "scenario.controller": (_S, "pd"),  # pd | rl | none
    "scenario.duration": (_F, 1000.0),
    "scenario.discard": (_F, 10.0),
    "offset.level": (_F, 0.0),
    "offset.start": (_F, 0.0),
    "offset.end": (_F, 0.0),
    "disturbance.s0": (_F, 0.0),  # > 0 enables the plant disturbance
    "disturbance.lo": (_F, 0.0),
    "disturbance.hi": (_F, 0.5),
    "noise.s0": (_F, 0.0),  # > 0 enables reference measurement noise
    "noise.lo": (_F, 3.14),
    "noise.hi": (_F, 30.0),
}

_TRUE = {"true", "on", "yes", "1"}
_FALSE = {"false", "off", "no", "0"}


def _convert(key: str, text: str):
    kind = CONFIG_SCHEMA[key][0]
    try:
        if kind == _F:
            return float(text)
        if kind == _I:
            return int(text)
        if kind == _B:
            low = text.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(text)
        return text
    except ValueError:
        raise ConfigError("invalid value for %s: %r" % (key, text)) from None


def parse_config_text(text: str) -> dict:
    """Raw key -> string pairs from flat config text."""
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("line %d is not key = value: %r" % (lineno, raw.strip()))
        key, value = [part.strip() for part in line.split("=", 1)]
        pairs[key] = value
    return pairs


def load_config(path=None) -> dict:
    """Fully resolved, typed configuration.

    Defaults first, then file overrides.  Unknown keys raise
    ConfigError listing every offender.
    """
    config = {key: default for key, (_, default) in CONFIG_SCHEMA.items()}
    if path is None:
        return config
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError("io-error", "cannot read config %s: %s" % (path, exc)) from exc
    pairs = parse_config_text(text)
    unknown = sorted(key for key in pairs if key not in CONFIG_SCHEMA)
    if unknown:
        raise ConfigError("unknown config key(s): %s" % ", ".join(unknown))
    for key, value in pairs.items():
        config[key] = _convert(key, value)
    return config


def _rao_from_config(config: dict):
    source = config["rao.source"]
    if source == "csv":
        if not config["rao.path"]:
            raise ConfigError("rao.source = csv needs rao.path")
        return read_rao_csv(config["rao.path"])
    if source != "parametric":
        raise ConfigError("rao.source must be parametric or csv, not %r" % source)
    params = RaoParams(
        heave=DofResponse(
            config["rao.heave.gain"], config["rao.heave.omega"], config["rao.heave.zeta"]
        ),
        roll=DofResponse(
            config["rao.roll.gain"], config["rao.roll.omega"], config["rao.roll.zeta"]
        ),
        pitch=DofResponse(
            config["rao.pitch.gain"], config["rao.pitch.omega"], config["rao.pitch.zeta"]
        ),
    )
    return parametric_rao(params, heading_deg=config["sea.heading"])


def _geometry_from_config(config: dict) -> CraneGeometry:
    return CraneGeometry(
        x=config["crane.x"],
        y=config["crane.y"],
        boom=config["crane.boom"],
        slew_deg=config["crane.slew"],
    )


def _params_from_config(config: dict) -> WinchParams:
    params = WinchParams(
        **{name: config["plant." + name] for name in WinchParams.__dataclass_fields__}
    )
    if config["plant.overrides"]:
        params = winch_params_from_file(config["plant.overrides"], params)
    return params


def _gains_from_config(config: dict) -> PdGains:
    return PdGains(kp=config["pd.kp"], kd=config["pd.kd"], tf=config["pd.tf"])


def _band_from_config(config: dict, section: str) -> ConstantBand | None:
    if config[section + ".s0"] <= 0.0:
        return None
    return ConstantBand(
        s0=config[section + ".s0"],
        omega_lo=config[section + ".lo"],
        omega_hi=config[section + ".hi"],
    )


def _agent_config(config: dict, seed: int) -> ddpg.AgentConfig:
    return ddpg.AgentConfig(
        gamma=config["agent.gamma"],
        tau=config["agent.tau"],
        lr_actor=config["agent.lr_actor"],
        lr_critic=config["agent.lr_critic"],
        batch_size=config["agent.batch"],
        buffer_capacity=config["agent.buffer"],
        episodes=config["agent.episodes"],
        steps_per_episode=config["agent.steps"],
        dt=config["sea.dt"],
        ou_theta=config["agent.ou_theta"],
        ou_mu=config["agent.ou_mu"],
        ou_sigma=config["agent.ou_sigma"],
        ou_dt=config["agent.ou_dt"],
        seed=seed,
    )


def _scenario_from_config(config: dict, name=None, controller=None) -> evalkit.ScenarioConfig:
    return evalkit.ScenarioConfig(
        name=name if name is not None else config["scenario.name"],
        hs=config["sea.hs"],
        tp=config["sea.tp"],
        duration=config["scenario.duration"],
        dt=config["sea.dt"],
        heading_deg=config["sea.heading"],
        controller=controller if controller is not None else config["scenario.controller"],
        seed=config["seed"],
        discard=config["scenario.discard"],
        offset_level=config["offset.level"],
        offset_start=config["offset.start"],
        offset_end=config["offset.end"],
        disturbance=_band_from_config(config, "disturbance"),
        noise=_band_from_config(config, "noise"),
        gravity=config["plant.gravity"],
    )


def _write_manifest(out_dir: Path, command: str, config: dict, artifacts, started, extra=None):
    manifest = {
        "tool": "heavelab %s" % __version__,
        "command": command,
        "seed": config["seed"],
        "config": {key: config[key] for key in sorted(config)},
        "artifacts": sorted(artifacts),
        "started_utc": started,
        "finished_utc": datetime.now(timezone.utc).isoformat(),
    }
    if extra:
        manifest.update(extra)
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _master_spawn(config: dict):
    """Fixed per-consumer split of the master seed.

    Children, in order: sea, disturbance, reference noise, reference
    rate noise, environment resets, agent entropy.
    """
    return np.random.SeedSequence(config["seed"]).spawn(6)


def cmd_synth(config: dict, out_dir: Path) -> int:
    started = _utc_now()
    seeds = _master_spawn(config)
    duration = config["sea.duration"]
    dt = config["sea.dt"]
    n = int(round(duration / dt)) + 1
    spec = PiersonMoskowitz(hs=config["sea.hs"], tp=config["sea.tp"])
    n_comp = config["sea.components"] or None
    harmonics = discretize(
        spec, duration, seeds[0], n_components=n_comp, jitter=config["sea.jitter"]
    )
    wave = synthesize(harmonics, n, dt)
    rao = _rao_from_config(config)
    motions = vessel_motions(wave, rao)
    z_winch = net_winch_heave(
        motions["heave"], motions["roll"], motions["pitch"], _geometry_from_config(config)
    )
    zdot_winch = motion_rate(z_winch)
    series = {
        "wave.csv": wave,
        "heave.csv": motions["heave"],
        "roll.csv": motions["roll"],
        "pitch.csv": motions["pitch"],
        "winch_heave.csv": z_winch,
        "winch_heave_rate.csv": zdot_winch,
    }
    artifacts = []
    for filename, data in series.items():
        data.to_csv(out_dir / filename)
        artifacts.append(filename)
    write_rao_csv(out_dir / "rao.csv", rao)
    artifacts.append("rao.csv")
    _write_manifest(out_dir, "synth", config, artifacts + ["manifest.json"], started)
    print(
        "synth: Hs %.3g m Tp %.3g s, %d samples, winch-heave rms %.4g m -> %s"
        % (config["sea.hs"], config["sea.tp"], n, evalkit.rms(z_winch.values), out_dir)
    )
    return 0


def _training_env(config: dict, agent_config: ddpg.AgentConfig, seeds):
    duration = config["sea.duration"]
    dt = config["sea.dt"]
    n = int(round(duration / dt)) + 1
    spec = PiersonMoskowitz(hs=config["sea.hs"], tp=config["sea.tp"])
    n_comp = config["sea.components"] or None
    wave = synthesize(
        discretize(spec, duration, seeds[0], n_components=n_comp, jitter=config["sea.jitter"]),
        n,
        dt,
    )
    rao = _rao_from_config(config)
    motions = vessel_motions(wave, rao)
    z_winch = net_winch_heave(
        motions["heave"], motions["roll"], motions["pitch"], _geometry_from_config(config)
    )
    zdot_winch = motion_rate(z_winch)
    start = config["train.reference_start"]
    k0 = int(round(start / dt))
    needed = agent_config.steps_per_episode + 1
    if config["train.resample_reference"]:
        reference = z_winch.values[k0:]
        rate = zdot_winch.values[k0:]
    else:
        reference = z_winch.values[k0 : k0 + needed]
        rate = zdot_winch.values[k0 : k0 + needed]
    if len(reference) < needed:
        raise CliError(
            "value-error",
            "reference slice [%g s ...] is shorter than an episode" % start,
        )

    def window(band: ConstantBand | None, seed):
        if band is None:
            return None
        series = synthesize(
            discretize(band, duration, seed), len(reference), dt
        )
        return series.values

    plant = WinchPlant(
        _params_from_config(config),
        substep=config["plant.substep"],
        gravity=config["plant.gravity"],
    )
    return ddpg.WinchEnv(
        plant=plant,
        reference=reference,
        reference_rate=rate,
        config=agent_config,
        reset_seed=seeds[4],
        disturbance=window(_band_from_config(config, "disturbance"), seeds[1]),
        noise_z=window(_band_from_config(config, "noise"), seeds[2]),
        noise_zdot=window(_band_from_config(config, "noise"), seeds[3]),
        resample=config["train.resample_reference"],
    )


def cmd_train(config: dict, out_dir: Path, checkpoint=None) -> int:
    started = _utc_now()
    seeds = _master_spawn(config)
    agent_seed = int(seeds[5].generate_state(1, dtype=np.uint64)[0])
    agent_config = _agent_config(config, agent_seed)
    env = _training_env(config, agent_config, seeds)
    checkpoint_path = Path(checkpoint) if checkpoint else out_dir / "agent.ckpt"
    log_path = out_dir / "training_log.csv"

    def progress(log: ddpg.EpisodeLog):
        print(
            "episode %3d/%d  total %10.2f  rolling(30) %10.2f"
            % (log.episode, agent_config.episodes, log.total_reward, log.rolling_mean_30),
            flush=True,
        )

    t_start = time.perf_counter()
    try:
        agent, logs = ddpg.train(
            agent_config,
            env,
            log_path=log_path,
            checkpoint_path=checkpoint_path,
            checkpoint_every=config["train.checkpoint_every"],
            progress=progress,
        )
    except ddpg.TrainingDiverged as exc:
        if exc.agent is not None:
            ddpg.save_agent(out_dir / "diverged.ckpt", exc.agent)
        raise CliError(
            "training-error",
            "%s (diagnostic checkpoint: %s)" % (exc, out_dir / "diverged.ckpt"),
        ) from exc
    elapsed = time.perf_counter() - t_start
    artifacts = ["training_log.csv", "manifest.json"]
    if checkpoint_path.parent == out_dir:
        artifacts.append(checkpoint_path.name)
    _write_manifest(
        out_dir,
        "train",
        config,
        artifacts,
        started,
        extra={
            "checkpoint": str(checkpoint_path),
            "train_seconds": elapsed,
            "final_rolling_mean_30": logs[-1].rolling_mean_30,
        },
    )
    print(
        "train: %d episodes in %.1f s, final rolling mean %.2f -> %s"
        % (agent_config.episodes, elapsed, logs[-1].rolling_mean_30, checkpoint_path)
    )
    return 0


def _load_agent_or_fail(checkpoint) -> ddpg.Agent:
    if not checkpoint:
        raise CliError("value-error", "this command needs --checkpoint")
    try:
        return ddpg.load_agent(checkpoint)
    except FileNotFoundError as exc:
        raise CliError("io-error", "checkpoint not found: %s" % checkpoint) from exc


def cmd_eval(config: dict, out_dir: Path, checkpoint=None) -> int:
    started = _utc_now()
    scenario = _scenario_from_config(config)
    agent = None
    if scenario.controller == "rl":
        agent = _load_agent_or_fail(checkpoint)
    result = evalkit.run_scenario(
        scenario,
        rao=_rao_from_config(config),
        geometry=_geometry_from_config(config),
        params=_params_from_config(config),
        gains=_gains_from_config(config),
        agent=agent,
    )
    evalkit.write_results_csv(out_dir / "results.csv", [result])
    dt = scenario.dt
    series = {
        "uncompensated.csv": result.uncompensated,
        "compensated.csv": result.compensated,
        "payout.csv": result.payout,
        "command.csv": result.command,
        "swash.csv": result.swash,
    }
    artifacts = ["results.csv"]
    for filename, values in series.items():
        TimeSeries(t0=0.0, dt=dt, values=values).to_csv(out_dir / filename)
        artifacts.append(filename)
    for filename, values in (
        ("psd_uncompensated.csv", result.uncompensated),
        ("psd_compensated.csv", result.compensated),
    ):
        omega, density = evalkit.welch_psd(TimeSeries(0.0, dt, values))
        evalkit.write_psd_csv(out_dir / filename, omega, density)
        artifacts.append(filename)
    extra = {
        "comp_percent": result.comp_percent,
        "rms_uncomp": result.rms_uncomp,
        "rms_comp": result.rms_comp,
        "sat_fraction": result.sat_fraction,
    }
    if result.snr_db is not None:
        extra["snr_db"] = result.snr_db
    _write_manifest(out_dir, "eval", config, artifacts + ["manifest.json"], started, extra)
    print(
        "eval: %s %s Hs %.3g Tp %.3g -> compensation %.2f%% (rms %.4g -> %.4g), "
        "saturation %.3f"
        % (
            scenario.name,
            scenario.controller,
            scenario.hs,
            scenario.tp,
            result.comp_percent,
            result.rms_uncomp,
            result.rms_comp,
            result.sat_fraction,
        )
    )
    return 0


def cmd_compare(config: dict, out_dir: Path, checkpoint=None) -> int:
    started = _utc_now()
    agent = _load_agent_or_fail(checkpoint)
    results = evalkit.compare_controllers(
        agent,
        seed=config["seed"],
        duration=config["scenario.duration"],
        rao=_rao_from_config(config),
        geometry=_geometry_from_config(config),
        params=_params_from_config(config),
        gains=_gains_from_config(config),
    )
    evalkit.write_results_csv(out_dir / "results.csv", results)
    _write_manifest(
        out_dir, "compare", config, ["results.csv", "manifest.json"], started
    )
    print("%-12s %-4s %6s %6s %12s %10s" % ("scenario", "ctrl", "Hs", "Tp", "comp %", "sat"))
    for res in results:
        sc = res.scenario
        print(
            "%-12s %-4s %6.2f %6.2f %12.2f %10.3f"
            % (sc.name, sc.controller, sc.hs, sc.tp, res.comp_percent, res.sat_fraction)
        )
    print("compare: results -> %s" % (out_dir / "results.csv"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heavelab",
        description="Active heave compensation laboratory: synthesis, training, evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, handler, needs_checkpoint in (
        ("synth", cmd_synth, False),
        ("train", cmd_train, True),
        ("eval", cmd_eval, True),
        ("compare", cmd_compare, True),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat section.key = value file")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--out", help="output directory (default runs/<command>)")
        if needs_checkpoint:
            p.add_argument("--checkpoint", help="agent checkpoint path")
        p.set_defaults(handler=handler, needs_checkpoint=needs_checkpoint)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config["seed"] = args.seed
        out_dir = Path(args.out) if args.out else Path("runs") / args.command
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.needs_checkpoint:
            return args.handler(config, out_dir, checkpoint=args.checkpoint)
        return args.handler(config, out_dir)
    except CliError as exc:
        print("%s: %s" % (exc.token, exc), file=sys.stderr)
        return 1
    except ConfigError as exc:
        print("config-error: %s" % exc, file=sys.stderr)
        return 1
    except evalkit.MetricUndefined as exc:
        print("metric-error: %s" % exc, file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print("io-error: %s" % exc, file=sys.stderr)
        return 1
    except ValueError as exc:
        print("value-error: %s" % exc, file=sys.stderr)
        return 1
