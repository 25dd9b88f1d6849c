"""Q-learning machinery: tabular oracles, linear TD updates, training loop.

The tabular pieces (value iteration, tabular Q-learning) exist as
cross-checks for the Bellman machinery on small synthetic MDPs. The linear
pieces are what the switching policy actually trains with: one weight column
per action, epsilon-greedy exploration with a persistent floor, and a batch
warm start replaying distance-threshold episodes before any online learning.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .geometry import build_path
from .policy import (
    Action,
    RewardConfig,
    extract_features,
    greedy_action,
    compose_controller,
    reward,
)
from .sim import Verdict, episode_terminated, sample_wind_field, step, wind_at

__all__ = [
    "Transition",
    "LearnConfig",
    "ToyMDP",
    "random_mdp",
    "value_iteration",
    "tabular_q_update",
    "tabular_q_learning",
    "linear_q_update",
    "epsilon_greedy",
    "warm_start",
    "train",
    "TrainingLog",
]


@dataclass(frozen=True)
class Transition:
    """One experience tuple in feature space."""

    phi_s: np.ndarray
    action: Action
    reward: float
    phi_next: np.ndarray
    terminal: bool


@dataclass(frozen=True)
class LearnConfig:
    learning_rate: float = 3e-3
    epsilon0: float = 0.1
    epsilon_decay: float = 0.99
    epsilon_floor: float = 0.01
    episodes: int = 3000
    warm_start_passes: int = 5
    seed: int = 0

    def validate(self) -> list:
        problems = []
        if self.learning_rate <= 0:
            problems.append("learn.learning_rate must be positive")
        if not 0.0 <= self.epsilon0 <= 1.0:
            problems.append("learn.epsilon0 must lie in [0, 1]")
        if not 0.0 < self.epsilon_decay <= 1.0:
            problems.append("learn.epsilon_decay must lie in (0, 1]")
        if self.episodes < 0 or self.warm_start_passes < 0:
            problems.append("learn counts must be non-negative")
        return problems


@dataclass(frozen=True)
class ToyMDP:
    """Small discrete MDP used as a test fixture for the Bellman machinery."""

    transitions: np.ndarray  # (S, A, S), rows sum to 1
    rewards: np.ndarray  # (S, A)
    discount: float

    def __post_init__(self):
        object.__setattr__(self, "transitions", np.asarray(self.transitions, dtype=float))
        object.__setattr__(self, "rewards", np.asarray(self.rewards, dtype=float))
        row_sums = self.transitions.sum(axis=2)
        if not np.allclose(row_sums, 1.0, atol=1e-12):
            raise ValueError("every (s, a) transition row must sum to 1")

    @property
    def n_states(self) -> int:
        return self.transitions.shape[0]

    @property
    def n_actions(self) -> int:
        return self.transitions.shape[1]


def random_mdp(rng: np.random.Generator, n_states: int = 5, n_actions: int = 2,
               discount: float = 0.9) -> ToyMDP:
    """Random dense MDP with rewards in [0, 1]."""
    raw = rng.uniform(0.1, 1.0, size=(n_states, n_actions, n_states))
    transitions = raw / raw.sum(axis=2, keepdims=True)
    rewards = rng.uniform(0.0, 1.0, size=(n_states, n_actions))
    return ToyMDP(transitions=transitions, rewards=rewards, discount=discount)


def bellman_residual(mdp: ToyMDP, q: np.ndarray) -> float:
    backup = mdp.rewards + mdp.discount * mdp.transitions @ q.max(axis=1)
    return float(np.max(np.abs(backup - q)))


def value_iteration(mdp: ToyMDP, tol: float = 1e-10) -> np.ndarray:
    """Iterate the Bellman operator until the sup-norm residual drops below tol."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    q = np.zeros((mdp.n_states, mdp.n_actions))
    while True:
        backup = mdp.rewards + mdp.discount * mdp.transitions @ q.max(axis=1)
        if np.max(np.abs(backup - q)) <= tol:
            return backup
        q = backup


def tabular_q_update(q: np.ndarray, transition, lr: float, gamma: float,
                     terminal: bool = False) -> np.ndarray:
    """One tabular TD update; returns a new table. Terminal next states bootstrap 0."""
    s, a, r, s_next = transition
    q = q.copy()
    bootstrap = 0.0 if terminal else gamma * q[s_next].max()
    q[s, a] += lr * (r + bootstrap - q[s, a])
    return q


def tabular_q_learning(mdp: ToyMDP, steps: int, epsilon: float,
                       rng: np.random.Generator) -> np.ndarray:
    """Tabular Q-learning with exploring starts and averaged iterates.

    Each step draws a uniform start state (so no state-action pair starves),
    picks the action epsilon-greedily, and applies a TD update with a
    1/sqrt(visit-count) learning rate. The returned table is the average of
    the iterates over the last 80% of the run, which suppresses the residual
    sampling noise of the final iterate.
    """
    q = np.zeros((mdp.n_states, mdp.n_actions))
    visits = np.zeros((mdp.n_states, mdp.n_actions), dtype=int)
    acc = np.zeros_like(q)
    acc_n = 0
    burn_in = steps - int(0.8 * steps)
    for t in range(steps):
        s = int(rng.integers(mdp.n_states))
        if rng.random() < epsilon:
            a = int(rng.integers(mdp.n_actions))
        else:
            a = int(np.argmax(q[s]))
        s_next = int(rng.choice(mdp.n_states, p=mdp.transitions[s, a]))
        r = mdp.rewards[s, a]
        visits[s, a] += 1
        q = tabular_q_update(q, (s, a, r, s_next), visits[s, a] ** -0.5, mdp.discount)
        if t >= burn_in:
            acc += q
            acc_n += 1
    return acc / acc_n if acc_n else q


def linear_q_update(theta: np.ndarray, tr: Transition, lr: float, gamma: float) -> np.ndarray:
    """One linear TD update on the taken action's weight column; returns a new matrix."""
    q_sa = float(tr.phi_s @ theta[:, tr.action])
    if tr.terminal:
        target = tr.reward
    else:
        target = tr.reward + gamma * float(np.max(tr.phi_next @ theta))
    theta = theta.copy()
    theta[:, tr.action] += lr * (target - q_sa) * tr.phi_s
    return theta


def epsilon_greedy(theta: np.ndarray, phi: np.ndarray, epsilon: float,
                   rng: np.random.Generator) -> Action:
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    if epsilon > 0.0 and rng.random() < epsilon:
        return Action(int(rng.integers(len(Action))))
    return greedy_action(theta, phi)


def _replay_transitions(record, scenario):
    """Reconstruct feature-space transitions from a recorded episode.

    The wind field is re-derived from the record's seed, so the wind features
    match what a policy would have observed live.
    """
    field = sample_wind_field(np.random.default_rng(record.seed), scenario.sim)
    traj = np.asarray(record.trajectory)
    env = scenario.envelope
    scales = scenario.feature_scales
    transitions = []
    deployed = False
    n_transitions = traj.shape[0] - 1
    for i in range(n_transitions):
        t_i, p_i, v_i, a_i = traj[i, 0], traj[i, 1:4], traj[i, 4:7], int(traj[i, 7])
        r_i = float(traj[i, 8])
        phi_s = _features_raw(p_i, v_i, deployed, env, field, t_i, scales)
        deployed_next = deployed or a_i == Action.DEPLOY
        t_n, p_n, v_n = traj[i + 1, 0], traj[i + 1, 1:4], traj[i + 1, 4:7]
        phi_next = _features_raw(p_n, v_n, deployed_next, env, field, t_n, scales)
        terminal = i == n_transitions - 1 and record.outcome != Verdict.TIMEOUT
        transitions.append(Transition(phi_s, Action(a_i), r_i, phi_next, terminal))
        deployed = deployed_next
    return transitions


def _features_raw(p, v, deployed, env, field, t, scales):
    from .sim import VehicleState

    s = VehicleState(position=p, velocity=v, time=float(t), deployed=deployed)
    return extract_features(s, env, wind_at(field, p, float(t)), scales)


def warm_start(episodes, theta0: np.ndarray, cfg: LearnConfig, scenario,
               rc: RewardConfig) -> np.ndarray:
    """Batch-fit the weights by replaying recorded episodes through the TD update."""
    episodes = list(episodes)
    if not episodes:
        raise ValueError("warm start needs a non-empty episode batch")
    theta = np.array(theta0, dtype=float, copy=True)
    transitions = []
    for record in episodes:
        transitions.extend(_replay_transitions(record, scenario))
    for _ in range(cfg.warm_start_passes):
        for tr in transitions:
            theta = linear_q_update(theta, tr, cfg.learning_rate, rc.discount)
    return theta


@dataclass
class TrainingLog:
    """Per-episode training statistics; rows align with episode index."""

    episodes: list = field(default_factory=list)

    COLUMNS = ("episode", "return", "outcome", "deploy_step", "epsilon")

    def append(self, episode, ret, outcome, deploy_step, epsilon, deploy_greedy=None):
        self.episodes.append(
            {
                "episode": episode,
                "return": ret,
                "outcome": outcome,
                "deploy_step": deploy_step,
                "epsilon": epsilon,
                # Whether the first deployment was the greedy choice rather
                # than an exploration draw; not part of the CSV columns.
                "deploy_greedy": deploy_greedy,
            }
        )

    def __len__(self):
        return len(self.episodes)


def train(scenario, rc: RewardConfig, cfg: LearnConfig, theta0: np.ndarray,
          wind_seeds=None):
    """On-policy linear Q-learning over seeded episodes.

    Wind fields come from ``wind_seeds`` (cycled; defaults to a range starting
    at ``cfg.seed``); exploration and update randomness comes from a separate
    stream, so the same wind seeds can be reused for evaluation comparisons
    elsewhere without touching exploration. Returns (theta, TrainingLog).
    """
    from .sim import VehicleState

    env = scenario.envelope
    mission = scenario.mission
    sim_cfg = scenario.sim
    scales = scenario.feature_scales
    path = build_path(mission)
    theta = np.array(theta0, dtype=float, copy=True)
    log = TrainingLog()
    if wind_seeds is None:
        wind_seeds = [cfg.seed + i for i in range(max(cfg.episodes, 1))]
    wind_seeds = list(wind_seeds)

    epsilon = cfg.epsilon0
    lr_warned = False
    for ep in range(cfg.episodes):
        field_rng = np.random.default_rng(wind_seeds[ep % len(wind_seeds)])
        wind_field = sample_wind_field(field_rng, sim_cfg)
        rng = np.random.default_rng([cfg.seed, ep])
        s = VehicleState(position=mission.waypoints[0], velocity=np.zeros(3))
        ret = 0.0
        disc = 1.0
        steps = 0
        deploy_step = None
        deploy_greedy = None
        while True:
            w = wind_at(wind_field, s.position, s.time)
            phi = extract_features(s, env, w, scales)
            if not lr_warned and cfg.learning_rate * float(phi @ phi) >= 1.0:
                warnings.warn(
                    "learning_rate times squared feature norm exceeds 1; "
                    "updates may diverge",
                    stacklevel=2,
                )
                lr_warned = True
            if s.deployed:
                a = Action.DEPLOY
            else:
                a = epsilon_greedy(theta, phi, epsilon, rng)
            if a == Action.DEPLOY and not s.deployed and deploy_step is None:
                deploy_step = steps
                deploy_greedy = greedy_action(theta, phi) == Action.DEPLOY
            u = compose_controller(a, s, path, w, sim_cfg)
            s_next = step(s, u, wind_field, sim_cfg)
            r = reward(s, a, s_next, env, rc)
            steps += 1
            verdict = episode_terminated(s_next, env, mission, steps, sim_cfg)
            # Timeout is truncation, not an absorbing state: keep the bootstrap.
            terminal = verdict not in (Verdict.RUNNING, Verdict.TIMEOUT)
            w_next = wind_at(wind_field, s_next.position, s_next.time)
            phi_next = extract_features(s_next, env, w_next, scales)
            theta = linear_q_update(
                theta, Transition(phi, a, r, phi_next, terminal),
                cfg.learning_rate, rc.discount,
            )
            ret += disc * r
            disc *= rc.discount
            s = s_next
            if verdict != Verdict.RUNNING:
                break
        log.append(ep, ret, verdict, deploy_step, epsilon, deploy_greedy)
        epsilon = max(cfg.epsilon_floor, epsilon * cfg.epsilon_decay)
    return theta, log
