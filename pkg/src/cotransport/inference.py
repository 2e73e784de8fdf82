"""Bayesian posterior over workspace-traversal strategies from joint actions.

The observer watches the joint action (a, u) and the object state, and forms
a belief over which side of each obstacle the team is committing to. The
belief combines a winding-number prior with directional action likelihoods:
before an obstacle is passed, the most likely action under a strategy is the
velocity that grows that strategy's winding number fastest; after passing,
motion toward the goal is most likely under every strategy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .topology import StrategyLabel, enumerate_strategies
from .workspace import Context, TeamState, Vec2

#: Default likelihood temperature in s/m. The exponent is rationality * (a . m)
#: with m a unit vector, so at the 0.3 m/s robot speed cap the default spans
#: exponents of about +-3: responsive but not saturated posteriors.
DEFAULT_RATIONALITY = 10.0


@dataclass(frozen=True)
class InferenceParams:
    """Tuning of the strategy observer.

    rationality: scales action-direction dot products inside the exponentials
        (1 / (m/s)). Larger values trust observed velocity directions more.
    passed_threshold: |winding| in turns after which an obstacle counts as
        passed and the strategy for it is considered decided.
    approach_angle: rotation away from the object->obstacle direction that
        defines each side's most likely approach velocity.
    stationary_speed: actions slower than this are scored as uninformative.
    """

    rationality: float = DEFAULT_RATIONALITY
    passed_threshold: float = 0.25
    approach_angle: float = math.pi / 3.0
    stationary_speed: float = 1e-4

    def __post_init__(self):
        if not (math.isfinite(self.rationality) and self.rationality > 0.0):
            raise DomainError(f"rationality must be positive, got {self.rationality!r}")
        if not (math.isfinite(self.passed_threshold) and self.passed_threshold > 0.0):
            raise DomainError("passed_threshold must be positive")
        if not (0.0 < self.approach_angle < math.pi / 2.0):
            raise DomainError("approach_angle must lie in (0, pi/2)")


@dataclass(frozen=True)
class StrategyDistribution:
    """Probability vector aligned with enumerate_strategies order."""

    probs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        if not self.probs:
            raise DomainError("empty strategy distribution")
        for p in self.probs:
            if not (0.0 <= p <= 1.0):
                raise DomainError(f"probability out of [0, 1]: {p!r}")
        if abs(sum(self.probs) - 1.0) > 1e-9:
            raise DomainError(f"probabilities sum to {sum(self.probs)!r}, not 1")

    def entropy(self) -> float:
        return entropy(self)

    def argmax(self) -> int:
        """Index of the most probable strategy; ties resolve to the lowest
        index (LEFT first), keeping tie-breaks deterministic."""
        best, best_p = 0, self.probs[0]
        for i, p in enumerate(self.probs):
            if p > best_p:
                best, best_p = i, p
        return best


def entropy(d: StrategyDistribution) -> float:
    """Information entropy in nats, with 0 * log 0 = 0."""
    h = 0.0
    for p in d.probs:
        if p > 0.0:
            h -= p * math.log(p)
    return h


def prior(w: float, params: InferenceParams | None = None) -> StrategyDistribution:
    """Winding-number prior over {LEFT, RIGHT} for a single obstacle.

    P(LEFT) = clamp(0.5 - 2w, 0, 1) and P(RIGHT) = clamp(0.5 + 2w, 0, 1):
    linear in the winding number, saturating to a point mass once |w|
    reaches a quarter turn. The pair sums to one by construction; a
    renormalization guards against round-off.
    """
    del params  # the prior shape has no free parameters
    if not math.isfinite(w):
        raise DomainError(f"non-finite winding: {w!r}")
    p_left = max(0.0, min(0.5 - 2.0 * w, 1.0))
    p_right = max(0.0, min(0.5 + 2.0 * w, 1.0))
    total = p_left + p_right
    if total != 1.0:
        p_left /= total
        p_right /= total
    return StrategyDistribution((p_left, p_right))


def likelihood_mode(
    sign: int,
    p: Vec2,
    obstacle_center: Vec2,
    goal: Vec2,
    passed: bool,
    params: InferenceParams,
) -> Vec2:
    """Unit direction of the most likely action under one strategy sign.

    Pre-passing this is the object->obstacle direction rotated by
    +approach_angle for LEFT (sign -1) and -approach_angle for RIGHT
    (sign +1); post-passing it is the direction to the goal for either sign.
    """
    if passed:
        to_goal = goal - p
        if to_goal.norm() == 0.0:
            raise DomainError("object exactly at the goal: direction undefined")
        return to_goal.unit()
    to_obs = obstacle_center - p
    if to_obs.norm() == 0.0:
        raise DomainError("object exactly at an obstacle center: direction undefined")
    d = to_obs.unit()
    c = math.cos(params.approach_angle)
    s = math.sin(params.approach_angle)
    if sign < 0:  # LEFT: rotate CCW
        return Vec2(c * d.x - s * d.y, s * d.x + c * d.y)
    return Vec2(c * d.x + s * d.y, -s * d.x + c * d.y)


def action_likelihood(
    a: Vec2,
    label: StrategyLabel,
    state: TeamState,
    c: Context,
    params: InferenceParams | None = None,
) -> float:
    """Unnormalized likelihood of one agent's action under a strategy.

    Only ratios across strategies matter; the value is exp(rationality *
    a . mode_direction). Near-stationary actions score 1 for every strategy.
    Single-obstacle contexts only.
    """
    params = params or InferenceParams()
    if len(c.obstacles) != 1 or len(label.signs) != 1:
        raise DomainError("action_likelihood is defined for single-obstacle contexts")
    if a.norm() < params.stationary_speed:
        return 1.0
    w = state.windings[0]
    passed = abs(w) >= params.passed_threshold
    mode = likelihood_mode(
        label.signs[0], state.object.position, c.obstacles[0].center,
        c.goal.position, passed, params,
    )
    return math.exp(params.rationality * a.dot(mode))


def posterior(
    a: Vec2,
    u: Vec2,
    state: TeamState,
    c: Context,
    params: InferenceParams | None = None,
) -> StrategyDistribution:
    """Posterior over strategies given the joint action (a, u).

    The two agents choose actions independently, so the joint likelihood
    factorizes into the same directional model applied to each action; the
    posterior is that product times the winding prior, normalized over the
    strategy set (the Bayes normalizer is implemented as normalization over
    strategies).

    Multi-obstacle contexts use an experimental factorized extension:
    per-obstacle binary posteriors are computed independently, with the
    directional likelihood applied only to the nearest not-yet-passed
    obstacle, and multiplied into the joint distribution.
    """
    params = params or InferenceParams()
    m = len(c.obstacles)
    if m == 0:
        raise DomainError("posterior is undefined without obstacles")
    if len(state.windings) != m:
        raise DomainError(f"{len(state.windings)} windings for {m} obstacles")

    if m == 1:
        pri = prior(state.windings[0], params)
        labels = (StrategyLabel((-1,)), StrategyLabel((1,)))
        masses = [
            action_likelihood(a, lbl, state, c, params)
            * action_likelihood(u, lbl, state, c, params)
            * pri.probs[i]
            for i, lbl in enumerate(labels)
        ]
        total = masses[0] + masses[1]
        if total <= 0.0:
            raise RuntimeError("posterior mass vanished; prior and likelihoods conflict")
        return StrategyDistribution((masses[0] / total, masses[1] / total))

    return _posterior_multi(a, u, state, c, params)


def _posterior_multi(
    a: Vec2, u: Vec2, state: TeamState, c: Context, params: InferenceParams
) -> StrategyDistribution:
    p = state.object.position
    passed = [abs(w) >= params.passed_threshold for w in state.windings]
    active = -1
    active_d2 = math.inf
    for i, ob in enumerate(c.obstacles):
        if passed[i]:
            continue
        d2 = (p - ob.center).dot(p - ob.center)
        if d2 < active_d2:
            active, active_d2 = i, d2

    factors: list[tuple[float, float]] = []
    for i, ob in enumerate(c.obstacles):
        pri = prior(state.windings[i], params)
        left, right = pri.probs
        if i == active:
            for act in (a, u):
                if act.norm() < params.stationary_speed:
                    continue
                m_l = likelihood_mode(-1, p, ob.center, c.goal.position, False, params)
                m_r = likelihood_mode(1, p, ob.center, c.goal.position, False, params)
                left *= math.exp(params.rationality * act.dot(m_l))
                right *= math.exp(params.rationality * act.dot(m_r))
        factors.append((left, right))

    labels = enumerate_strategies(len(c.obstacles))
    masses = []
    for lbl in labels:
        mass = 1.0
        for i, s in enumerate(lbl.signs):
            mass *= factors[i][0] if s < 0 else factors[i][1]
        masses.append(mass)
    total = sum(masses)
    if total <= 0.0:
        raise RuntimeError("posterior mass vanished; prior and likelihoods conflict")
    return StrategyDistribution(tuple(mass / total for mass in masses))
