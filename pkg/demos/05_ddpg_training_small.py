"""A miniature actor-critic training run.

The full protocol (150 episodes of 3000 steps with 256-wide networks)
takes the better part of an hour; this demo shrinks every knob so the
whole learning loop, replay buffer, target networks and exploration
noise included, finishes in well under a minute.  The resulting agent
is not useful, but the episode totals already show the reward climbing
away from its random-initialization floor.

For a real agent use the command line:  heavelab train --seed 101
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from heavelab.ddpg import AgentConfig, WinchEnv, train
from heavelab.plant import WinchPlant
from heavelab.seaway import PiersonMoskowitz, discretize, synthesize
from heavelab.vessel import (
    CraneGeometry,
    motion_rate,
    net_winch_heave,
    parametric_rao,
    vessel_motions,
)

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

config = AgentConfig(
    episodes=15,
    steps_per_episode=200,
    batch_size=32,
    buffer_capacity=4000,
    actor_hidden=(32, 32),
    critic_state_width=16,
    critic_action_width=8,
    critic_hidden=64,
    ou_sigma=0.05,  # the tiny nets need livelier exploration
    seed=3,
)

# a short moderate-sea winch-heave record serves as the reference
dt = config.dt
duration = 60.0
n = int(round(duration / dt)) + 1
wave = synthesize(
    discretize(PiersonMoskowitz(hs=2.5, tp=8.0), duration, 11), n, dt
)
motions = vessel_motions(wave, parametric_rao())
z_winch = net_winch_heave(
    motions["heave"], motions["roll"], motions["pitch"], CraneGeometry()
)
zdot_winch = motion_rate(z_winch)

env = WinchEnv(
    plant=WinchPlant(),
    reference=z_winch.values,
    reference_rate=zdot_winch.values,
    config=config,
    reset_seed=12,
    resample=True,
)

print("episode   total reward")
agent, logs = train(
    config, env, progress=lambda log: print("%7d %14.1f" % (log.episode, log.total_reward))
)

fig, ax = plt.subplots(figsize=(7, 4))
ax.plot([log.episode for log in logs], [log.total_reward for log in logs], "o-")
ax.set_xlabel("episode")
ax.set_ylabel("total reward")
ax.set_title("Miniature training run (%d steps per episode)" % config.steps_per_episode)
fig.tight_layout()
fig.savefig(os.path.join(OUT, "05_training_small.png"), dpi=130)

first = np.mean([log.total_reward for log in logs[:3]])
last = np.mean([log.total_reward for log in logs[-3:]])
print("mean of first 3 episodes %10.1f" % first)
print("mean of last 3 episodes  %10.1f" % last)
print("figure -> %s" % os.path.join(OUT, "05_training_small.png"))
