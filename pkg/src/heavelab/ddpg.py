"""Deterministic policy-gradient agent for active heave compensation.

The agent observes s = [z_w, zdot_w, z_ref, zdot_ref] (winch payout and
rate plus the reference motion pair it should cancel) and outputs one
normalized swash command in [-1, 1].  Learning follows the standard
off-policy actor-critic recipe: a replay buffer of transitions, an
Ornstein-Uhlenbeck exploration process added to the actor's action,
temporal-difference targets bootstrapped through separate slowly
tracking target networks, and soft target updates after every gradient
step.  Episodes have a fixed horizon and no terminal states, so targets
bootstrap through episode boundaries without masking.

The tracking reward at each step, with e = |z_w + z_ref| and
edot = |zdot_w + zdot_ref|, is

    r = 1 - 20 e - edot        if e <= 0.05
    r = -10 e - 2 edot         otherwise

which pays a bonus inside a 5 cm tracking band and penalizes error and
error rate elsewhere.  Rewards always use true plant state; measurement
noise, when present, corrupts only what the controller observes.
"""

from __future__ import annotations

import copy
import gc
from dataclasses import dataclass, fields

import numpy as np

from . import nn
from .plant import WinchPlant


class TrainingDiverged(Exception):
    """Raised when a loss or parameter goes non-finite during training.

    Carries the agent and episode so a diagnostic checkpoint can be
    written by the caller.
    """

    def __init__(self, message, agent=None, episode=None):
        super().__init__(message)
        self.agent = agent
        self.episode = episode


@dataclass
class AgentConfig:
    """Hyperparameters; defaults are the tuned training setup."""

    gamma: float = 0.998  # discount
    tau: float = 0.005  # target soft-update rate
    lr_actor: float = 1e-3
    lr_critic: float = 2e-3
    batch_size: int = 128
    buffer_capacity: int = 50000
    episodes: int = 150
    steps_per_episode: int = 3000
    dt: float = 0.1  # control interval [s]
    ou_theta: float = 0.15
    ou_mu: float = 0.0
    ou_sigma: float = 5e-4
    ou_dt: float = 1.0
    action_low: float = -1.0
    action_high: float = 1.0
    actor_hidden: tuple = (256, 256)
    critic_state_width: int = 64
    critic_action_width: int = 32
    critic_hidden: int = 512
    final_init_scale: float = 3e-3
    init_swash: tuple = (-1.0, 1.0)  # reset range for x_p
    init_pressure: tuple = (-1e6, 1e6)  # reset range for delta_p [Pa]
    init_rate: tuple = (-0.1, 0.1)  # reset range for zdot_w [m/s]
    init_position: tuple = (0.0, 1.0)  # reset range for z_w [m]
    seed: int = 0


def reward(e_z: float, edot_z: float) -> float:
    """Tracking reward for absolute errors e_z and edot_z (both >= 0).

    The boundary e_z = 0.05 belongs to the in-band branch.
    """
    if e_z <= 0.05:
        return 1.0 - 20.0 * e_z - edot_z
    return -10.0 * e_z - 2.0 * edot_z


@dataclass
class Observation:
    """Controller view of one control instant."""

    z_w: float  # winch payout [m]
    zdot_w: float  # payout rate [m/s]
    z_ref: float  # vessel-induced winch heave minus any offset [m]
    zdot_ref: float  # its rate [m/s]

    def as_array(self) -> np.ndarray:
        return np.array([self.z_w, self.zdot_w, self.z_ref, self.zdot_ref])


@dataclass
class Transition:
    obs: Observation
    action: float
    reward: float
    next_obs: Observation


class ReplayBuffer:
    """Fixed-capacity ring of transitions with uniform resampling."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.s = np.zeros((capacity, 4))
        self.a = np.zeros((capacity, 1))
        self.r = np.zeros(capacity)
        self.s2 = np.zeros((capacity, 4))
        self.idx = 0
        self.size = 0

    def __len__(self) -> int:
        return self.size

    def add_arrays(self, s, a, r, s2) -> None:
        i = self.idx
        self.s[i] = s
        self.a[i, 0] = a
        self.r[i] = r
        self.s2[i] = s2
        self.idx = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def add(self, transition: Transition) -> None:
        self.add_arrays(
            transition.obs.as_array(),
            transition.action,
            transition.reward,
            transition.next_obs.as_array(),
        )

    def sample(self, rng: np.random.Generator, n: int):
        """Uniform sample with replacement; returns (s, a, r, s2)."""
        if self.size == 0:
            raise ValueError("cannot sample from an empty buffer")
        idx = rng.integers(0, self.size, size=n)
        return self.s[idx], self.a[idx], self.r[idx], self.s2[idx]


@dataclass
class OuNoise:
    """Ornstein-Uhlenbeck exploration process."""

    theta: float = 0.15
    mu: float = 0.0
    sigma: float = 5e-4
    dt: float = 1.0
    state: float = 0.0

    def reset(self) -> None:
        self.state = self.mu

    def step(self, rng: np.random.Generator) -> float:
        self.state += self.theta * (self.mu - self.state) * self.dt
        self.state += self.sigma * np.sqrt(self.dt) * rng.standard_normal()
        return self.state


@dataclass
class Critic:
    """Action-value network with separate state and action input branches.

    The state embedding (width 64) and action embedding (width 32) are
    concatenated and passed through one hidden layer to a linear scalar
    head.
    """

    state_branch: nn.Mlp
    action_branch: nn.Mlp
    trunk: nn.Mlp

    def param_list(self) -> list:
        return (
            self.state_branch.param_list()
            + self.action_branch.param_list()
            + self.trunk.param_list()
        )

    def q_cached(self, s: np.ndarray, u: np.ndarray):
        e_s, cache_s = nn.forward_cached(self.state_branch, s)
        e_a, cache_a = nn.forward_cached(self.action_branch, u)
        h = np.concatenate([e_s, e_a], axis=1)
        q, cache_t = nn.forward_cached(self.trunk, h)
        return q, (cache_s, cache_a, cache_t)

    def q(self, s: np.ndarray, u: np.ndarray) -> np.ndarray:
        s = np.atleast_2d(np.asarray(s, dtype=float))
        u = np.atleast_2d(np.asarray(u, dtype=float))
        if u.shape[0] != s.shape[0]:
            u = u.reshape(s.shape[0], -1)
        value, _ = self.q_cached(s, u)
        return value

    def backward(self, caches, upstream):
        """Full parameter gradients plus input gradients.

        Returns (bundle_state, bundle_action, bundle_trunk); the first
        two carry d_input for s and u respectively.
        """
        cache_s, cache_a, cache_t = caches
        split = self.state_branch.widths[-1]
        bundle_t = nn.backward_cached(self.trunk, cache_t, upstream)
        bundle_s = nn.backward_cached(
            self.state_branch, cache_s, bundle_t.d_input[:, :split]
        )
        bundle_a = nn.backward_cached(
            self.action_branch, cache_a, bundle_t.d_input[:, split:]
        )
        return bundle_s, bundle_a, bundle_t

    def action_grad(self, caches, upstream) -> np.ndarray:
        """dL/du only, skipping all parameter gradients."""
        cache_s, cache_a, cache_t = caches
        split = self.state_branch.widths[-1]
        bundle_t = nn.backward_cached(self.trunk, cache_t, upstream, want_params=False)
        bundle_a = nn.backward_cached(
            self.action_branch, cache_a, bundle_t.d_input[:, split:], want_params=False
        )
        return bundle_a.d_input


@dataclass
class Agent:
    config: AgentConfig
    actor: nn.Mlp
    critic: Critic
    target_actor: nn.Mlp
    target_critic: Critic
    opt_actor: nn.AdamState
    opt_critic: nn.AdamState
    noise: OuNoise
    rng_ou: np.random.Generator
    rng_minibatch: np.random.Generator


def _build_critic(config: AgentConfig, rng: np.random.Generator) -> Critic:
    state_branch = nn.init_mlp(
        (4, config.critic_state_width), ("relu",), rng
    )
    action_branch = nn.init_mlp(
        (1, config.critic_action_width), ("relu",), rng
    )
    trunk = nn.init_mlp(
        (
            config.critic_state_width + config.critic_action_width,
            config.critic_hidden,
            1,
        ),
        ("relu", "linear"),
        rng,
        final_scale=config.final_init_scale,
    )
    return Critic(state_branch=state_branch, action_branch=action_branch, trunk=trunk)


def agent_init(config: AgentConfig | None = None) -> Agent:
    """Fresh agent with targets equal to the main networks.

    The config seed is split into four independent streams in fixed
    order: actor initialization, critic initialization, exploration
    noise, and minibatch sampling.
    """
    if config is None:
        config = AgentConfig()
    ss = np.random.SeedSequence(config.seed).spawn(4)
    rng_actor = np.random.default_rng(ss[0])
    rng_critic = np.random.default_rng(ss[1])
    actor = nn.init_mlp(
        (4, *config.actor_hidden, 1),
        ("relu",) * len(config.actor_hidden) + ("tanh",),
        rng_actor,
        final_scale=config.final_init_scale,
    )
    critic = _build_critic(config, rng_critic)
    return Agent(
        config=config,
        actor=actor,
        critic=critic,
        target_actor=copy.deepcopy(actor),
        target_critic=copy.deepcopy(critic),
        opt_actor=nn.init_adam(actor.param_list(), config.lr_actor),
        opt_critic=nn.init_adam(critic.param_list(), config.lr_critic),
        noise=OuNoise(
            theta=config.ou_theta,
            mu=config.ou_mu,
            sigma=config.ou_sigma,
            dt=config.ou_dt,
            state=config.ou_mu,
        ),
        rng_ou=np.random.default_rng(ss[2]),
        rng_minibatch=np.random.default_rng(ss[3]),
    )


def select_action(agent: Agent, obs: np.ndarray, explore: bool = True) -> float:
    """Actor output, plus exploration noise when requested, clipped."""
    a = nn.forward(agent.actor, np.asarray(obs, dtype=float)).item()
    if explore:
        a += agent.noise.step(agent.rng_ou)
    return float(np.clip(a, agent.config.action_low, agent.config.action_high))


def td_targets(agent: Agent, batch) -> np.ndarray:
    """Bootstrapped targets y = r + gamma Q'(s', mu'(s')), shape (n, 1)."""
    _, _, r, s2 = batch
    a2 = nn.forward(agent.target_actor, s2)
    q2, _ = agent.target_critic.q_cached(s2, a2)
    q2 *= agent.config.gamma
    q2 += r[:, None]
    return q2


def critic_update(agent: Agent, batch) -> float:
    """One Adam step on the mean squared TD error; returns the loss
    evaluated before the step."""
    s, a, _, _ = batch
    y = td_targets(agent, batch)
    q, caches = agent.critic.q_cached(s, a)
    err = q - y
    loss = float(np.mean(err**2))
    upstream = np.multiply(err, 2.0 / err.shape[0], out=err)
    bundle_s, bundle_a, bundle_t = agent.critic.backward(caches, upstream)
    grads = bundle_s.param_list() + bundle_a.param_list() + bundle_t.param_list()
    nn.adam_update(agent.critic.param_list(), grads, agent.opt_critic)
    return loss


def actor_update(agent: Agent, batch) -> float:
    """One Adam ascent step on mean Q(s, mu(s)); returns that mean
    evaluated before the step.

    The chain runs through the critic's action input: upstream
    -1/n enters the critic, only dQ/du is propagated, and that gradient
    drives the actor's backward pass.
    """
    s = batch[0]
    a, actor_caches = nn.forward_cached(agent.actor, s)
    q, critic_caches = agent.critic.q_cached(s, a)
    upstream = np.full_like(q, -1.0 / q.shape[0])
    d_u = agent.critic.action_grad(critic_caches, upstream)
    bundle = nn.backward_cached(agent.actor, actor_caches, d_u)
    nn.adam_update(agent.actor.param_list(), bundle.param_list(), agent.opt_actor)
    return float(np.mean(q))


def soft_update(
    target_params: list, source_params: list, tau: float, scratch=None
) -> None:
    """In-place blend target <- tau source + (1 - tau) target.

    tau = 1 copies the source exactly; tau = 0 leaves the target
    untouched.  scratch, when given, is a parallel list of buffers
    absorbing the tau-weighted source terms so the call allocates
    nothing; results are identical either way.
    """
    if scratch is None:
        for p_t, p in zip(target_params, source_params):
            p_t *= 1.0 - tau
            p_t += tau * p
        return
    for p_t, p, s in zip(target_params, source_params, scratch):
        p_t *= 1.0 - tau
        np.multiply(p, tau, out=s)
        p_t += s


def soft_update_agent(agent: Agent) -> None:
    tau = agent.config.tau
    actor_params = agent.actor.param_list()
    critic_params = agent.critic.param_list()
    scratch = getattr(agent, "_soft_scratch", None)
    if scratch is None:
        scratch = (
            [np.empty_like(p) for p in actor_params],
            [np.empty_like(p) for p in critic_params],
        )
        agent._soft_scratch = scratch
    soft_update(agent.target_actor.param_list(), actor_params, tau, scratch[0])
    soft_update(agent.target_critic.param_list(), critic_params, tau, scratch[1])


class WinchEnv:
    """Fixed-horizon training environment around the winch plant.

    The caller supplies the reference pair (vessel-induced winch heave
    and its rate, offset already subtracted) sampled at the control
    interval, with at least steps_per_episode + 1 samples.  Optional
    per-step arrays add an acceleration disturbance to the plant and
    measurement noise to the observed reference channels (the vessel
    motion feed is the noisy sensor; the winch's own encoder is clean).
    Rewards always use the true reference.
    """

    def __init__(
        self,
        plant: WinchPlant,
        reference: np.ndarray,
        reference_rate: np.ndarray,
        config: AgentConfig,
        reset_seed,
        disturbance: np.ndarray | None = None,
        noise_z: np.ndarray | None = None,
        noise_zdot: np.ndarray | None = None,
        resample: bool = False,
    ):
        needed = config.steps_per_episode + 1
        if len(reference) < needed or len(reference_rate) < needed:
            raise ValueError(
                "reference needs %d samples, got %d"
                % (needed, min(len(reference), len(reference_rate)))
            )
        self.plant = plant
        self.reference = np.asarray(reference, dtype=float)
        self.reference_rate = np.asarray(reference_rate, dtype=float)
        self.config = config
        self.rng_reset = np.random.default_rng(reset_seed)
        self.disturbance = disturbance
        self.noise_z = noise_z
        self.noise_zdot = noise_zdot
        self.resample = resample
        self.base = 0
        self.t = 0
        self.state = np.zeros(4)

    def _observe(self) -> Observation:
        k = self.base + self.t
        ref = self.reference[k]
        refdot = self.reference_rate[k]
        if self.noise_z is not None:
            ref = ref + self.noise_z[k]
        if self.noise_zdot is not None:
            refdot = refdot + self.noise_zdot[k]
        return Observation(
            z_w=float(self.state[3]),
            zdot_w=float(self.state[2]),
            z_ref=float(ref),
            zdot_ref=float(refdot),
        )

    def reset(self) -> Observation:
        """Draw a fresh plant state; draws happen in state order.

        With resample=True one extra draw then picks the episode's
        starting index inside the reference record.
        """
        c = self.config
        self.state = np.array(
            [
                self.rng_reset.uniform(*c.init_swash),
                self.rng_reset.uniform(*c.init_pressure),
                self.rng_reset.uniform(*c.init_rate),
                self.rng_reset.uniform(*c.init_position),
            ]
        )
        if self.resample:
            slack = len(self.reference) - (c.steps_per_episode + 1)
            self.base = int(self.rng_reset.integers(0, slack + 1))
        self.t = 0
        return self._observe()

    def step(self, action: float):
        """Apply one command; returns (next observation, reward).

        The reward is evaluated at the post-step instant from true
        plant state and the true reference.
        """
        k = self.base + self.t
        d = 0.0 if self.disturbance is None else float(self.disturbance[k])
        self.state = self.plant.step_array(
            self.state, float(action), d, self.config.dt
        )
        self.t += 1
        k = self.base + self.t
        e_z = abs(self.state[3] + self.reference[k])
        edot_z = abs(self.state[2] + self.reference_rate[k])
        return self._observe(), reward(e_z, edot_z)


@dataclass
class EpisodeLog:
    episode: int
    total_reward: float
    rolling_mean_30: float  # mean of the last 30 episode totals


def write_training_log(path, logs) -> None:
    """CSV with header episode,total_reward,rolling_mean_30."""
    with open(path, "w") as f:
        f.write("episode,total_reward,rolling_mean_30\n")
        for log in logs:
            f.write(
                "%d,%.17g,%.17g\n"
                % (log.episode, log.total_reward, log.rolling_mean_30)
            )


def read_training_log(path) -> list:
    logs = []
    with open(path) as f:
        next(f)
        for line in f:
            ep, total, rolling = line.strip().split(",")
            logs.append(EpisodeLog(int(ep), float(total), float(rolling)))
    return logs


def train(
    config: AgentConfig,
    env: WinchEnv,
    log_path=None,
    checkpoint_path=None,
    checkpoint_every: int = 0,
    progress=None,
) -> tuple:
    """Run the full training loop; returns (agent, episode logs).

    Per step: act with exploration noise, store the transition, and
    once the buffer holds a full batch do one critic update, one actor
    update, and one soft target update.  The exploration process resets
    at every episode start.  Non-finite losses or parameters raise
    TrainingDiverged carrying the agent for diagnostics.
    """
    agent = agent_init(config)
    buffer = ReplayBuffer(config.buffer_capacity)
    logs = []
    totals = []
    # the loop makes no reference cycles; cyclic GC only adds pauses
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        _train_loop(config, env, agent, buffer, logs, totals,
                    log_path, checkpoint_path, checkpoint_every, progress)
    finally:
        if gc_was_enabled:
            gc.enable()
    if checkpoint_path is not None:
        save_agent(checkpoint_path, agent)
    return agent, logs


def _train_loop(
    config, env, agent, buffer, logs, totals,
    log_path, checkpoint_path, checkpoint_every, progress
) -> None:
    for episode in range(1, config.episodes + 1):
        agent.noise.reset()
        obs = env.reset()
        s = obs.as_array()
        total = 0.0
        for _ in range(config.steps_per_episode):
            u = select_action(agent, s, explore=True)
            obs2, r = env.step(u)
            s2 = obs2.as_array()
            buffer.add_arrays(s, u, r, s2)
            if len(buffer) >= config.batch_size:
                batch = buffer.sample(agent.rng_minibatch, config.batch_size)
                loss = critic_update(agent, batch)
                if not np.isfinite(loss):
                    raise TrainingDiverged(
                        "critic loss diverged in episode %d" % episode,
                        agent=agent,
                        episode=episode,
                    )
                actor_update(agent, batch)
                soft_update_agent(agent)
            total += r
            s = s2
        for p in agent.actor.param_list() + agent.critic.param_list():
            if not np.all(np.isfinite(p)):
                raise TrainingDiverged(
                    "parameters diverged in episode %d" % episode,
                    agent=agent,
                    episode=episode,
                )
        totals.append(total)
        rolling = float(np.mean(totals[-30:]))
        logs.append(EpisodeLog(episode, total, rolling))
        if log_path is not None:
            write_training_log(log_path, logs)
        if (
            checkpoint_path is not None
            and checkpoint_every > 0
            and episode % checkpoint_every == 0
        ):
            save_agent(checkpoint_path, agent)
        if progress is not None:
            progress(logs[-1])


def _config_header_items(config: AgentConfig) -> list:
    items = []
    for f in fields(config):
        value = getattr(config, f.name)
        if isinstance(value, tuple):
            text = ",".join("%.17g" % v for v in value)
        elif isinstance(value, int):
            text = "%d" % value
        else:
            text = "%.17g" % value
        items.append(("config.%s" % f.name, text))
    return items


def _config_from_header(header: dict) -> AgentConfig:
    kwargs = {}
    for f in fields(AgentConfig):
        key = "config.%s" % f.name
        if key not in header:
            continue
        text = header[key]
        default = f.default
        if isinstance(default, tuple):
            element = int if isinstance(default[0], int) else float
            kwargs[f.name] = tuple(element(float(p)) for p in text.split(","))
        elif isinstance(default, int):
            kwargs[f.name] = int(text)
        else:
            kwargs[f.name] = float(text)
    return AgentConfig(**kwargs)


def save_agent(path, agent: Agent) -> None:
    """Checkpoint all four networks, both optimizers, and the config."""
    header = [("kind", "agent")] + _config_header_items(agent.config)
    nets = [
        ("actor", agent.actor),
        ("critic_state", agent.critic.state_branch),
        ("critic_action", agent.critic.action_branch),
        ("critic_trunk", agent.critic.trunk),
        ("target_actor", agent.target_actor),
        ("target_critic_state", agent.target_critic.state_branch),
        ("target_critic_action", agent.target_critic.action_branch),
        ("target_critic_trunk", agent.target_critic.trunk),
    ]
    opts = [
        ("actor", ["actor"], agent.opt_actor),
        (
            "critic",
            ["critic_state", "critic_action", "critic_trunk"],
            agent.opt_critic,
        ),
    ]
    nn.write_checkpoint(path, header, nets, opts)


def load_agent(path) -> Agent:
    """Rebuild an agent from a checkpoint.

    Exploration and minibatch random streams restart from the stored
    seed; the replay buffer and instantaneous noise state are not part
    of a checkpoint.
    """
    header, nets, opts = nn.read_checkpoint(path)
    if header.get("kind") != "agent":
        raise ValueError("checkpoint %s does not hold an agent" % path)
    config = _config_from_header(header)
    ss = np.random.SeedSequence(config.seed).spawn(4)
    critic = Critic(
        state_branch=nets["critic_state"],
        action_branch=nets["critic_action"],
        trunk=nets["critic_trunk"],
    )
    target_critic = Critic(
        state_branch=nets["target_critic_state"],
        action_branch=nets["target_critic_action"],
        trunk=nets["target_critic_trunk"],
    )
    return Agent(
        config=config,
        actor=nets["actor"],
        critic=critic,
        target_actor=nets["target_actor"],
        target_critic=target_critic,
        opt_actor=opts["actor"][1],
        opt_critic=opts["critic"][1],
        noise=OuNoise(
            theta=config.ou_theta,
            mu=config.ou_mu,
            sigma=config.ou_sigma,
            dt=config.ou_dt,
            state=config.ou_mu,
        ),
        rng_ou=np.random.default_rng(ss[2]),
        rng_minibatch=np.random.default_rng(ss[3]),
    )
