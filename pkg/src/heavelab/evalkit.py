"""Closed-loop scenario runs and performance metrics.

A scenario realizes one sea state, maps it to winch-point heave, runs
the plant under a chosen controller, and reports how much of the motion
was cancelled:

    compensation % = 100 (rms_uncompensated - rms_compensated)
                         / rms_uncompensated

where the uncompensated series is the vessel-induced winch heave and
the compensated series is z_w + z_winch - offset.  An initial settle
window is discarded before any metric.  Measurement noise, when
configured, corrupts the reference signal the controllers see (the
vessel-motion sensor); metrics and rewards always use true signals, so
a run with controller "none" is unaffected by noise.

Seed discipline: the scenario seed is split into four fixed streams
(sea, disturbance, reference noise, reference-rate noise), so enabling
or disabling noise never changes the wave realization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.signal

from . import ddpg, nn
from .pid import PdController, PdGains
from .plant import WinchParams, WinchPlant, hanging_equilibrium
from .seaway import (
    ConstantBand,
    PiersonMoskowitz,
    TimeSeries,
    discretize,
    synthesize,
)
from .vessel import CraneGeometry, Rao, motion_rate, net_winch_heave, parametric_rao, vessel_motions


class MetricUndefined(Exception):
    """Raised when a ratio metric's denominator vanishes."""


def rms(values: np.ndarray) -> float:
    """Root mean square of a sample array."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise MetricUndefined("rms of an empty window")
    return float(np.sqrt(np.mean(values**2)))


def compensation_percent(rms_uncomp: float, rms_comp: float) -> float:
    """Percent of motion removed; negative when the loop amplifies."""
    if rms_uncomp == 0.0:
        raise MetricUndefined("uncompensated rms is zero")
    return 100.0 * (rms_uncomp - rms_comp) / rms_uncomp


def snr_db(signal_rms: float, noise_rms: float) -> float:
    """Signal-to-noise ratio 20 log10(signal/noise) in dB."""
    if noise_rms == 0.0:
        raise MetricUndefined("noise rms is zero")
    if signal_rms == 0.0:
        raise MetricUndefined("signal rms is zero")
    return 20.0 * float(np.log10(signal_rms / noise_rms))


def welch_psd(
    series: TimeSeries, nperseg: int | None = None, overlap: float = 0.5
):
    """One-sided Welch density over angular frequency.

    Hann window, constant detrend, 50 percent overlap by default.
    Returns (omega [rad/s], density [units^2 s/rad]); the integral of
    the density over omega approximates the series variance.
    """
    x = np.asarray(series.values, dtype=float)
    if nperseg is None:
        nperseg = min(2048, len(x))
    nperseg = min(nperseg, len(x))
    freq, den = scipy.signal.welch(
        x,
        fs=1.0 / series.dt,
        window="hann",
        nperseg=nperseg,
        noverlap=int(nperseg * overlap),
        detrend="constant",
        scaling="density",
        return_onesided=True,
    )
    return 2.0 * np.pi * freq, den / (2.0 * np.pi)


@dataclass
class ScenarioConfig:
    """One evaluation run's knobs."""

    name: str = "custom"
    hs: float = 4.0  # significant wave height [m]
    tp: float = 9.0  # peak period [s]
    duration: float = 1000.0  # run length [s]
    dt: float = 0.1  # control interval [s]
    heading_deg: float = 135.0
    controller: str = "pd"  # pd | rl | none
    seed: int = 1000
    discard: float = 10.0  # settle window excluded from metrics [s]
    offset_level: float = 0.0  # setpoint shift [m]
    offset_start: float = 0.0  # shift window start [s]
    offset_end: float = 0.0  # shift window end [s]; <= start means run end
    disturbance: ConstantBand | None = None  # plant acceleration noise
    noise: ConstantBand | None = None  # reference measurement noise
    gravity: bool = True


@dataclass
class RunResult:
    """Series and metrics from one scenario."""

    scenario: ScenarioConfig
    times: np.ndarray
    uncompensated: np.ndarray  # vessel-induced winch heave [m]
    compensated: np.ndarray  # z_w + z_winch - offset [m]
    payout: np.ndarray  # winch payout z_w [m]
    command: np.ndarray  # controller output (ZOH, last value repeated)
    swash: np.ndarray  # swash position after each interval
    rms_uncomp: float
    rms_comp: float
    comp_percent: float
    sat_fraction: float  # fraction of settled samples with |swash| at the clamp
    snr_db: float | None  # reference SNR when noise is configured

    def compensated_series(self) -> TimeSeries:
        return TimeSeries(t0=0.0, dt=self.scenario.dt, values=self.compensated)

    def uncompensated_series(self) -> TimeSeries:
        return TimeSeries(t0=0.0, dt=self.scenario.dt, values=self.uncompensated)


def offset_profile(scenario: ScenarioConfig, times: np.ndarray) -> np.ndarray:
    """Piecewise-constant setpoint shift over the run."""
    offset = np.zeros_like(times)
    if scenario.offset_level != 0.0:
        end = scenario.offset_end
        if end <= scenario.offset_start:
            end = np.inf
        mask = (times >= scenario.offset_start) & (times < end)
        offset[mask] = scenario.offset_level
    return offset


def run_scenario(
    scenario: ScenarioConfig,
    rao: Rao | None = None,
    geometry: CraneGeometry | None = None,
    params: WinchParams | None = None,
    gains: PdGains | None = None,
    agent: ddpg.Agent | None = None,
) -> RunResult:
    """Synthesize, simulate, and score one closed-loop run."""
    if scenario.controller not in ("pd", "rl", "none"):
        raise ValueError("unknown controller %r" % scenario.controller)
    if scenario.controller == "rl" and agent is None:
        raise ValueError("controller 'rl' needs an agent")
    seeds = np.random.SeedSequence(scenario.seed).spawn(4)
    n = int(round(scenario.duration / scenario.dt)) + 1
    dt = scenario.dt

    spec = PiersonMoskowitz(hs=scenario.hs, tp=scenario.tp)
    wave = synthesize(discretize(spec, scenario.duration, seeds[0]), n, dt)
    if rao is None:
        rao = parametric_rao(heading_deg=scenario.heading_deg)
    motions = vessel_motions(wave, rao)
    z_winch = net_winch_heave(
        motions["heave"], motions["roll"], motions["pitch"], geometry
    )
    zdot_winch = motion_rate(z_winch)
    times = z_winch.times
    offset = offset_profile(scenario, times)
    reference = z_winch.values - offset
    reference_rate = zdot_winch.values

    def band_values(band: ConstantBand | None, seed) -> np.ndarray | None:
        if band is None:
            return None
        if band.omega_hi > np.pi / dt:
            raise ValueError("band edge exceeds the control Nyquist rate")
        return synthesize(discretize(band, scenario.duration, seed), n, dt).values

    disturbance = band_values(scenario.disturbance, seeds[1])
    noise_z = band_values(scenario.noise, seeds[2])
    noise_zdot = band_values(scenario.noise, seeds[3])

    params = params if params is not None else WinchParams()
    plant = WinchPlant(params, gravity=scenario.gravity)
    if scenario.gravity:
        state = hanging_equilibrium(params).as_array()
    else:
        state = np.zeros(4)

    pd = PdController(gains, dt) if scenario.controller == "pd" else None
    actor = agent.actor if scenario.controller == "rl" else None
    a_low = agent.config.action_low if agent is not None else -1.0
    a_high = agent.config.action_high if agent is not None else 1.0

    payout = np.empty(n)
    swash = np.empty(n)
    command = np.zeros(n)
    payout[0] = state[3]
    swash[0] = state[0]
    for k in range(n - 1):
        ref = reference[k]
        refdot = reference_rate[k]
        if noise_z is not None:
            ref = ref + noise_z[k]
        if noise_zdot is not None:
            refdot = refdot + noise_zdot[k]
        if pd is not None:
            u = pd.step(-(state[3] + ref))
        elif actor is not None:
            obs = np.array([state[3], state[2], ref, refdot])
            u = float(np.clip(nn.forward(actor, obs).item(), a_low, a_high))
        else:
            u = 0.0
        d = 0.0 if disturbance is None else disturbance[k]
        state = plant.step_array(state, u, d, dt)
        command[k] = u
        payout[k + 1] = state[3]
        swash[k + 1] = state[0]
    command[n - 1] = command[n - 2]

    compensated = payout + z_winch.values - offset
    settled = times >= times[0] + scenario.discard
    rms_u = rms(z_winch.values[settled])
    rms_c = rms(compensated[settled])
    snr = None
    if noise_z is not None:
        snr = snr_db(rms(z_winch.values[settled]), rms(noise_z[settled]))
    return RunResult(
        scenario=scenario,
        times=times,
        uncompensated=z_winch.values,
        compensated=compensated,
        payout=payout,
        command=command,
        swash=swash,
        rms_uncomp=rms_u,
        rms_comp=rms_c,
        comp_percent=compensation_percent(rms_u, rms_c),
        sat_fraction=float(np.mean(np.abs(swash[settled]) >= 1.0)),
        snr_db=snr,
    )


# Reference sea states for controller comparisons: (name, Hs [m], Tp [s]).
SEA_STATES = (
    ("slight", 1.5, 6.0),
    ("moderate", 4.0, 9.0),
    ("rough", 6.0, 12.0),
    ("very_rough", 8.5, 14.0),
)


def standard_scenarios(
    controller: str = "pd",
    seed: int = 1000,
    duration: float = 1000.0,
    dt: float = 0.1,
) -> list:
    """The four comparison sea states as scenario configs.

    Each state gets its own derived seed (stable per state, shared
    between controllers so both face the same realization).
    """
    out = []
    for i, (name, hs, tp) in enumerate(SEA_STATES):
        out.append(
            ScenarioConfig(
                name=name,
                hs=hs,
                tp=tp,
                duration=duration,
                dt=dt,
                controller=controller,
                seed=seed + i,
            )
        )
    return out


def compare_controllers(
    agent: ddpg.Agent,
    seed: int = 1000,
    duration: float = 1000.0,
    rao: Rao | None = None,
    geometry: CraneGeometry | None = None,
    params: WinchParams | None = None,
    gains: PdGains | None = None,
) -> list:
    """PD and RL across the four sea states on shared realizations."""
    results = []
    for base in standard_scenarios(seed=seed, duration=duration):
        for controller in ("pd", "rl"):
            scenario = ScenarioConfig(**{**base.__dict__, "controller": controller})
            results.append(
                run_scenario(
                    scenario,
                    rao=rao,
                    geometry=geometry,
                    params=params,
                    gains=gains,
                    agent=agent,
                )
            )
    return results


def write_results_csv(path, results) -> None:
    """Comparison rows with the fixed header."""
    with open(path, "w") as f:
        f.write(
            "scenario,controller,Hs,Tp,comp_percent,rms_uncomp,rms_comp,"
            "sat_fraction,seed\n"
        )
        for res in results:
            sc = res.scenario
            f.write(
                "%s,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n"
                % (
                    sc.name,
                    sc.controller,
                    sc.hs,
                    sc.tp,
                    res.comp_percent,
                    res.rms_uncomp,
                    res.rms_comp,
                    res.sat_fraction,
                    sc.seed,
                )
            )


def write_psd_csv(path, omega: np.ndarray, density: np.ndarray) -> None:
    """Two-column spectrum file with header omega,density."""
    with open(path, "w") as f:
        f.write("omega,density\n")
        for k in range(len(omega)):
            f.write("%.17g,%.17g\n" % (omega[k], density[k]))
