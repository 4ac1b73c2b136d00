"""Active heave compensation laboratory.

Sea-state synthesis, vessel response, a hydraulic winch plant, and two
controllers (a filtered PD loop and a deterministic policy-gradient
agent trained from scratch), plus the evaluation harness that compares
them.
"""

__version__ = "0.1.0"

from .seaway import (
    ConstantBand,
    HarmonicSet,
    PiersonMoskowitz,
    TimeSeries,
    band_limited_series,
    discretize,
    synthesize,
)
from .vessel import (
    CraneGeometry,
    DofResponse,
    Rao,
    RaoParams,
    motion_rate,
    net_winch_heave,
    parametric_rao,
    read_rao_csv,
    response_series,
    vessel_motions,
    write_rao_csv,
)
from .plant import (
    PlantFault,
    WinchParams,
    WinchPlant,
    WinchState,
    hanging_equilibrium,
    system_matrices,
    winch_params_from_file,
)
from .pid import PdController, PdGains
from . import nn
from .ddpg import (
    Agent,
    AgentConfig,
    Observation,
    OuNoise,
    ReplayBuffer,
    Transition,
    TrainingDiverged,
    WinchEnv,
    agent_init,
    load_agent,
    reward,
    save_agent,
    select_action,
    train,
)
from .evalkit import (
    MetricUndefined,
    RunResult,
    ScenarioConfig,
    compare_controllers,
    compensation_percent,
    rms,
    run_scenario,
    snr_db,
    welch_psd,
)
