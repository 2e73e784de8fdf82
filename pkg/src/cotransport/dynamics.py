"""Quasistatic rigid-stick dynamics and the constant-velocity human model.

The transported object is a stick held at both ends. Neither inertia nor
force enters: commanded endpoint velocities are projected onto the rigid
constraint and integrated directly. The along-stick disagreement between the
two commands (the stretch) is physically impossible, so it is removed by an
equal split; what remains decomposes into a translation of the midpoint and
a rotation about it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError
from .topology import WindingAccumulator, winding_update
from .workspace import Obstacle, Pose2, TeamState, Vec2, normalize_angle

#: Simulation tick matching the 15 Hz control loop.
DEFAULT_DT = 1.0 / 15.0
#: Mobile-base end-effector speed limit.
DEFAULT_ROBOT_SPEED_CAP = 0.3
#: Simulated-human speed limit, kept comparable to the robot's.
DEFAULT_HUMAN_SPEED_CAP = 1.0
DEFAULT_STICK_LENGTH = 0.914


@dataclass(frozen=True)
class StickModel:
    """Kinematic parameters of the transported stick and the two agents."""

    length: float = DEFAULT_STICK_LENGTH
    dt: float = DEFAULT_DT
    robot_speed_cap: float = DEFAULT_ROBOT_SPEED_CAP
    human_speed_cap: float = DEFAULT_HUMAN_SPEED_CAP

    def __post_init__(self):
        if not (math.isfinite(self.length) and self.length > 0.0):
            raise DomainError(f"length must be positive, got {self.length!r}")
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            raise DomainError(f"dt must be positive, got {self.dt!r}")
        if not (math.isfinite(self.robot_speed_cap) and self.robot_speed_cap > 0.0):
            raise DomainError("robot_speed_cap must be positive")
        if not (math.isfinite(self.human_speed_cap) and self.human_speed_cap > 0.0):
            raise DomainError("human_speed_cap must be positive")


@dataclass(frozen=True)
class HumanPrediction:
    """Per-rollout-step human velocity forecast (constant across steps)."""

    velocities: tuple[Vec2, ...]

    def __post_init__(self):
        object.__setattr__(self, "velocities", tuple(self.velocities))
        if not self.velocities:
            raise DomainError("empty prediction")


def step(
    state: TeamState,
    a: Vec2,
    u: Vec2,
    model: StickModel,
    obstacles: Sequence[Obstacle] = (),
) -> TeamState:
    """Advance the team state by one tick under commands a (human) and u (robot).

    Commands are clamped to the speed caps, projected onto the rigid stick
    (stretch removed by equal split), and integrated with explicit Euler:
    translation at the projected-velocity mean, rotation at the rate implied
    by the perpendicular velocity difference. Endpoints are rebuilt from the
    new pose at exactly model.length, so length error cannot accumulate.
    Winding numbers follow the midpoint; `obstacles` must match the state's
    winding vector (pass the context's obstacles, or nothing for
    obstacle-free scenes).
    """
    if abs(state.stick_length - model.length) > 1e-6:
        raise DomainError(
            f"state stick length {state.stick_length:.9f} does not match "
            f"model length {model.length:.9f}"
        )
    if len(state.windings) != len(obstacles):
        raise DomainError(
            f"{len(state.windings)} windings for {len(obstacles)} obstacles"
        )
    a = a.clamped(model.human_speed_cap)
    u = u.clamped(model.robot_speed_cap)

    e = state.object.heading_vector()  # robot_end -> human_end, unit by construction
    stretch = (a - u).dot(e)
    half = 0.5 * stretch
    a_rigid = a - e * half
    u_rigid = u + e * half

    v = (a_rigid + u_rigid) * 0.5
    omega = e.cross(a_rigid - u_rigid) / model.length

    mid = state.object.position + v * model.dt
    heading = normalize_angle(state.object.heading + omega * model.dt)
    pose = Pose2(mid, heading)
    arm = pose.heading_vector() * (model.length / 2.0)
    human_end = mid + arm
    robot_end = mid - arm

    windings = state.windings
    if obstacles:
        acc = WindingAccumulator(windings, state.object.position)
        windings = winding_update(acc, mid, obstacles).windings

    return TeamState(
        object=pose,
        human_end=human_end,
        robot_end=robot_end,
        human_vel=a_rigid,
        robot_vel=u_rigid,
        windings=windings,
        time=state.time + model.dt,
    )


def predict_human(
    history: Sequence[Vec2], steps: int, model: StickModel
) -> HumanPrediction:
    """Constant-velocity forecast: repeat the latest observed sample.

    The observer samples human velocity at 10 Hz; the newest sample, clamped
    to the human speed cap, is assumed to persist for the whole horizon. An
    empty history (cold start) predicts a stationary human.
    """
    if steps < 1:
        raise DomainError(f"steps must be >= 1, got {steps}")
    if history:
        v = history[-1].clamped(model.human_speed_cap)
    else:
        v = Vec2(0.0, 0.0)
    return HumanPrediction((v,) * steps)
