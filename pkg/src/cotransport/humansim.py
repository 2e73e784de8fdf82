"""Scripted human partners for closed-loop evaluation without participants.

Four kinds. `committed` heads along its target strategy's most likely
direction but yields (stops) when the stick is close to an obstacle and
moving would make it worse. `stubborn` is committed with the yield rule
removed: it never brakes, even near collision. `compliant` follows whatever
strategy the current belief ranks highest, i.e. it lets the robot lead.
`noisy-committed` adds seeded Gaussian noise to the committed command.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .dynamics import DEFAULT_HUMAN_SPEED_CAP
from .errors import DomainError
from .inference import InferenceParams, StrategyDistribution, likelihood_mode
from .topology import StrategyLabel, enumerate_strategies
from .workspace import ZERO, Context, TeamState, Vec2, segment_square_distance

KINDS = ("committed", "compliant", "stubborn", "noisy-committed")

#: Stick-to-obstacle clearance below which a yielding human refuses to
#: push closer (square boundary distance, meters).
YIELD_MARGIN = 0.15

#: Lookahead used by the yield probe.
_PROBE_DT = 1.0 / 15.0


@dataclass(frozen=True)
class HumanPolicy:
    kind: str
    target: StrategyLabel | None = None
    noise_sigma: float = 0.0
    speed: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown policy kind {self.kind!r}")
        if self.kind != "compliant" and self.target is None:
            raise DomainError(f"{self.kind} policy requires a target strategy")
        if not (0.0 < self.speed <= DEFAULT_HUMAN_SPEED_CAP):
            raise DomainError(f"speed must lie in (0, {DEFAULT_HUMAN_SPEED_CAP}]")
        if not (math.isfinite(self.noise_sigma) and self.noise_sigma >= 0.0):
            raise DomainError("noise_sigma must be nonnegative")
        if self.seed < 0:
            raise DomainError(f"seed must be nonnegative, got {self.seed}")


def act(
    policy: HumanPolicy,
    state: TeamState,
    c: Context,
    belief: StrategyDistribution | None = None,
    params: InferenceParams | None = None,
) -> Vec2:
    """Human velocity command for the current tick.

    `belief` feeds the compliant kind (the posterior from the previous
    tick's executed actions); other kinds ignore it. Deterministic given
    (policy.seed, state.time).
    """
    params = params or InferenceParams()
    signs = _driving_signs(policy, c, belief)
    v = _intent_velocity(policy, state, c, signs, params)

    if policy.kind == "noisy-committed" and policy.noise_sigma > 0.0:
        rng = np.random.default_rng((policy.seed, _time_key(state.time)))
        noise = rng.normal(0.0, policy.noise_sigma, 2)
        v = Vec2(v.x + float(noise[0]), v.y + float(noise[1]))

    v = v.clamped(DEFAULT_HUMAN_SPEED_CAP)

    if policy.kind in ("committed", "noisy-committed") and _should_yield(state, c, v):
        return ZERO
    return v


def _driving_signs(
    policy: HumanPolicy, c: Context, belief: StrategyDistribution | None
) -> tuple[int, ...]:
    m = len(c.obstacles)
    if policy.kind == "compliant":
        if m == 0:
            return ()
        if belief is None:
            return enumerate_strategies(m)[0].signs  # uniform prior: lead with LEFT
        labels = enumerate_strategies(m)
        if len(belief.probs) != len(labels):
            raise DomainError("belief size does not match the strategy space")
        return labels[belief.argmax()].signs
    assert policy.target is not None
    if m and len(policy.target.signs) != m:
        raise DomainError("target strategy does not match the obstacle count")
    return policy.target.signs


def _intent_velocity(
    policy: HumanPolicy,
    state: TeamState,
    c: Context,
    signs: tuple[int, ...],
    params: InferenceParams,
) -> Vec2:
    p = state.object.position
    active = -1
    best = math.inf
    for i, ob in enumerate(c.obstacles):
        if abs(state.windings[i]) >= params.passed_threshold:
            continue
        d2 = (p - ob.center).dot(p - ob.center)
        if d2 < best:
            active, best = i, d2

    if active < 0:  # nothing left to pass: head for the goal
        to_goal = c.goal.position - p
        if to_goal.norm() < 1e-12:
            return ZERO
        return to_goal.unit() * policy.speed
    mode = likelihood_mode(
        signs[active], p, c.obstacles[active].center, c.goal.position, False, params
    )
    return mode * policy.speed


def _should_yield(state: TeamState, c: Context, v: Vec2) -> bool:
    """True when clearance is already tight and v would shrink it further.

    The probe translates the whole stick by one tick of v, a coarse stand-in
    for "keep pushing this way".
    """
    if not c.obstacles or (v.x == 0.0 and v.y == 0.0):
        return False
    d_now = min(
        segment_square_distance(state.robot_end, state.human_end, ob)
        for ob in c.obstacles
    )
    if d_now >= YIELD_MARGIN:
        return False
    shift = v * _PROBE_DT
    d_next = min(
        segment_square_distance(state.robot_end + shift, state.human_end + shift, ob)
        for ob in c.obstacles
    )
    return d_next < d_now


def _time_key(t: float) -> int:
    """Bit pattern of the state clock; keys per-tick noise deterministically."""
    return struct.unpack("<Q", struct.pack("<d", t))[0]
