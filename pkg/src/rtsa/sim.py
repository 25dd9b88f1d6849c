"""Reduced-state multirotor simulation with stochastic wind.

The vehicle is a point mass with bounded commanded acceleration. The nominal
autopilot is a pure-pursuit PD path follower; the recovery controller cuts
thrust and opens a parachute. Wind enters through a linear air-drag coupling,
so strong wind can push the closed loop off course. Both controllers are
queried generatively and never introspected by the rest of the system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import Envelope, Mission, Path, contains, path_target

__all__ = [
    "VehicleState",
    "ControlInput",
    "WindField",
    "SimConfig",
    "Verdict",
    "sample_wind_field",
    "wind_at",
    "nominal_control",
    "recovery_control",
    "step",
    "episode_terminated",
]

GRAVITY = 9.81


@dataclass(frozen=True)
class VehicleState:
    position: np.ndarray
    velocity: np.ndarray
    time: float = 0.0
    deployed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float))


@dataclass(frozen=True)
class ControlInput:
    commanded_acceleration: np.ndarray
    parachute: bool = False

    def __post_init__(self):
        object.__setattr__(
            self,
            "commanded_acceleration",
            np.asarray(self.commanded_acceleration, dtype=float),
        )


@dataclass(frozen=True)
class WindField:
    """Per-episode wind: constant horizontal base plus sinusoidal gusts.

    Purely horizontal by construction (no vertical wind), deterministic given
    the field parameters and the query time.
    """

    base: np.ndarray
    gust_amplitude: np.ndarray
    gust_frequencies: np.ndarray
    gust_phases: np.ndarray

    def __post_init__(self):
        for name in ("base", "gust_amplitude", "gust_frequencies", "gust_phases"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.05
    a_max: float = 6.0
    cruise_speed: float = 5.0
    lookahead: float = 10.0
    kp: float = 0.4
    kd: float = 2.0
    air_drag: float = 0.4
    parachute_drag_z: float = 1.5
    parachute_drag_xy: float = 0.0
    max_steps: int = 2400
    wind_mean_x: float = 6.0
    wind_mean_y: float = 3.0
    wind_sigma: float = 8.0
    gust_sigma: float = 2.0

    def validate(self) -> list:
        problems = []
        if self.dt <= 0:
            problems.append("sim.dt must be positive")
        if self.max_steps < 1:
            problems.append("sim.max_steps must be at least 1")
        if self.a_max <= 0:
            problems.append("sim.a_max must be positive")
        if self.cruise_speed <= 0:
            problems.append("sim.cruise_speed must be positive")
        if self.lookahead <= 0:
            problems.append("sim.lookahead must be positive")
        for name in ("air_drag", "parachute_drag_z", "parachute_drag_xy"):
            if getattr(self, name) < 0:
                problems.append(f"sim.{name} must be non-negative")
        if self.wind_sigma < 0 or self.gust_sigma < 0:
            problems.append("sim wind parameters must be non-negative")
        return problems


class Verdict:
    """Episode termination verdicts."""

    RUNNING = "running"
    COMPLETED = "completed"
    EXITED = "exited"
    GROUNDED = "grounded"
    TIMEOUT = "timeout"


# Gust frequency band (rad/s): periods of roughly 12 s to 2 min, so gusts
# evolve over a mission but are not noise.
_GUST_FREQ_LO = 0.05
_GUST_FREQ_HI = 0.5


def sample_wind_field(rng: np.random.Generator, cfg: SimConfig) -> WindField:
    """Draw a per-episode wind field.

    The horizontal base components are the prevailing wind (wind_mean_x/y)
    plus zero-mean Gaussian variation with std-dev wind_sigma. Draw order is
    fixed: base x, base y, then per horizontal axis the gust amplitude
    ~ U(0, 2 * gust_sigma), frequency ~ U(0.05, 0.5) rad/s and phase
    ~ U(0, 2 pi). The same seed always yields the same field.
    """
    base = np.array([cfg.wind_mean_x + cfg.wind_sigma * rng.standard_normal(),
                     cfg.wind_mean_y + cfg.wind_sigma * rng.standard_normal(),
                     0.0])
    amp = np.zeros(3)
    freq = np.zeros(3)
    phase = np.zeros(3)
    for axis in range(2):
        amp[axis] = rng.uniform(0.0, 2.0 * cfg.gust_sigma)
        freq[axis] = rng.uniform(_GUST_FREQ_LO, _GUST_FREQ_HI)
        phase[axis] = rng.uniform(0.0, 2.0 * math.pi)
    return WindField(base=base, gust_amplitude=amp, gust_frequencies=freq, gust_phases=phase)


def wind_at(field: WindField, p, t: float) -> np.ndarray:
    """Wind velocity at position p and time t (vertical component is zero)."""
    w = field.base + field.gust_amplitude * np.sin(field.gust_frequencies * t + field.gust_phases)
    w[2] = 0.0
    return w


def nominal_control(s: VehicleState, path: Path, wind, cfg: SimConfig) -> ControlInput:
    """Black-box path follower: PD tracking of a pure-pursuit target.

    No wind feedforward; the wind argument is part of the generative query
    interface but an off-the-shelf tracker does not observe it.
    """
    target = path_target(path, s.position, cfg.lookahead)
    to_target = target - s.position
    dist = float(np.linalg.norm(to_target))
    if dist > 1e-9:
        v_des = cfg.cruise_speed * (to_target / dist)
    else:
        v_des = np.zeros(3)
    u = cfg.kp * to_target + cfg.kd * (v_des - s.velocity)
    norm = float(np.linalg.norm(u))
    if norm > cfg.a_max:
        u = u * (cfg.a_max / norm)
    return ControlInput(commanded_acceleration=u, parachute=False)


def recovery_control(s: VehicleState) -> ControlInput:
    """Terminal recovery: rotors off, parachute out."""
    return ControlInput(commanded_acceleration=np.zeros(3), parachute=True)


def step(s: VehicleState, u: ControlInput, field: WindField, cfg: SimConfig) -> VehicleState:
    """Advance the vehicle one time step with semi-implicit Euler.

    Nominal mode is hover-compensated: gravity is cancelled by thrust and the
    net acceleration is the command plus air drag against the wind-relative
    velocity. Parachute mode has no thrust: gravity, vertical parachute drag
    and (optionally) horizontal parachute drag act on the wind-relative
    velocity. Ground contact (z = 0) halts the vehicle.
    """
    w = wind_at(field, s.position, s.time)
    parachute = u.parachute or s.deployed
    if parachute:
        v_rel = w - s.velocity
        a = np.array(
            [
                cfg.parachute_drag_xy * v_rel[0],
                cfg.parachute_drag_xy * v_rel[1],
                -GRAVITY + cfg.parachute_drag_z * v_rel[2],
            ]
        )
    else:
        a = u.commanded_acceleration + cfg.air_drag * (w - s.velocity)
    v = s.velocity + cfg.dt * a
    p = s.position + cfg.dt * v
    if p[2] <= 0.0:
        p = np.array([p[0], p[1], 0.0])
        v = np.zeros(3)
    return VehicleState(position=p, velocity=v, time=s.time + cfg.dt, deployed=parachute)


def episode_terminated(
    s: VehicleState,
    env: Envelope,
    mission: Mission,
    step_count: int,
    cfg: SimConfig,
) -> str:
    """Classify the current state; precedence exited > completed > grounded > timeout."""
    if not contains(s.position, env):
        return Verdict.EXITED
    if not s.deployed:
        if np.linalg.norm(s.position - mission.waypoints[-1]) <= mission.arrival_radius:
            return Verdict.COMPLETED
    if s.deployed and s.position[2] == 0.0:
        return Verdict.GROUNDED
    if step_count >= cfg.max_steps:
        return Verdict.TIMEOUT
    return Verdict.RUNNING
