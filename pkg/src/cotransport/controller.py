"""Sampling-based MPC with an implicit-communication entropy objective.

The planner perturbs a nominal control sequence with Gaussian noise,
rolls each candidate forward through the stick dynamics against a
constant-velocity human forecast, scores obstacle clearance, goal progress,
and (optionally) the strategy uncertainty a partner-modeled observer would
retain, then blends candidates with softmin weights. Setting w_ent = 0
removes the communication term and leaves a conventional goal-seeking MPC;
that ablation is the "vanilla" algorithm referenced by the trial harness.

Rollouts are evaluated as a single fused numpy batch so a full plan fits
inside one 15 Hz control tick.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import HumanPrediction, StickModel, predict_human
from .errors import DomainError
from .inference import InferenceParams, entropy as dist_entropy, posterior
from .workspace import (
    Context,
    Pose2,
    TeamState,
    Vec2,
    normalize_angle,
    point_segment_distance,
)

#: Obstacle-cost cap substituting for -log(0).
OBSTACLE_COST_CAP = 1e6


@dataclass(frozen=True)
class ControllerConfig:
    horizon_steps: int = 15
    rollout_dt: float = 0.25
    samples: int = 100
    gamma: float = 0.95
    w_obs: float = 1.0
    w_ent: float = 1.0
    delta: float = 0.5
    lam: float = 0.1
    noise_sigma: float = 0.15
    speed_cap: float = 0.3
    seed: int = 0
    #: Optional terminal heading penalty weight; 0 keeps the cost positional.
    heading_weight: float = 0.0

    def __post_init__(self):
        if self.horizon_steps < 1:
            raise DomainError(f"horizon_steps must be >= 1, got {self.horizon_steps}")
        if self.samples < 1:
            raise DomainError(f"samples must be >= 1, got {self.samples}")
        if not (0.0 < self.gamma <= 1.0):
            raise DomainError(f"gamma must lie in (0, 1], got {self.gamma!r}")
        if not (math.isfinite(self.delta) and self.delta > 0.0):
            raise DomainError(f"delta must be positive, got {self.delta!r}")
        if not (math.isfinite(self.lam) and self.lam > 0.0):
            raise DomainError(f"lam must be positive, got {self.lam!r}")
        if not (math.isfinite(self.noise_sigma) and self.noise_sigma > 0.0):
            raise DomainError(f"noise_sigma must be positive, got {self.noise_sigma!r}")
        if not (math.isfinite(self.rollout_dt) and self.rollout_dt > 0.0):
            raise DomainError(f"rollout_dt must be positive, got {self.rollout_dt!r}")
        if not (math.isfinite(self.speed_cap) and self.speed_cap > 0.0):
            raise DomainError(f"speed_cap must be positive, got {self.speed_cap!r}")
        if self.w_obs < 0.0 or self.w_ent < 0.0 or self.heading_weight < 0.0:
            raise DomainError("cost weights must be nonnegative")
        if self.seed < 0:
            raise DomainError(f"seed must be nonnegative, got {self.seed}")


@dataclass(frozen=True)
class Plan:
    """Planned robot control sequence with rollout diagnostics.

    entropy_trace / obstacle_trace are the per-step cost terms along the
    returned sequence; path is the forecast object midpoint at each step.
    """

    controls: tuple[Vec2, ...]
    expected_cost: float
    entropy_trace: tuple[float, ...] = ()
    obstacle_trace: tuple[float, ...] = ()
    path: tuple[Vec2, ...] = ()


def terminal_cost(p: Pose2, g: Pose2) -> float:
    """Squared positional distance to the goal; heading is not scored."""
    d = p.position - g.position
    return d.dot(d)


def obstacle_cost(state: TeamState, c: Context, delta: float) -> float:
    """Log-barrier clearance penalty for the whole stick segment.

    Distance is from the segment to each obstacle center (the square extent
    is deliberately ignored here: costs stay smooth, collision adjudication
    elsewhere uses the boundary). Zero distance returns the finite cap.
    """
    if delta <= 0.0:
        raise DomainError(f"delta must be positive, got {delta!r}")
    if not c.obstacles:
        return 0.0
    d = min(
        point_segment_distance(ob.center, state.robot_end, state.human_end)
        for ob in c.obstacles
    )
    if d <= 0.0:
        return OBSTACLE_COST_CAP
    return min(max(0.0, -math.log(d / delta)), OBSTACLE_COST_CAP)


def entropy_cost(
    state: TeamState,
    a_pred: Vec2,
    u: Vec2,
    c: Context,
    params: InferenceParams | None = None,
) -> float:
    """Strategy uncertainty an observer would retain after the joint action.

    The candidate robot control u is scored together with the predicted
    human action: low values mean the pair reads unambiguously as one
    passing strategy. Obstacle-free contexts have nothing to infer.
    """
    if not c.obstacles:
        return 0.0
    return dist_entropy(posterior(a_pred, u, state, c, params))


def rollout_cost(
    state: TeamState,
    controls: Sequence[Vec2],
    human_pred: HumanPrediction,
    c: Context,
    config: ControllerConfig,
    params: InferenceParams | None = None,
    model: StickModel | None = None,
) -> float:
    """Discounted running cost plus terminal cost of one control sequence.

    Reference scalar implementation over dynamics.step; the planner itself
    uses the equivalent fused batch evaluation.
    """
    from . import dynamics

    if len(controls) != config.horizon_steps:
        raise DomainError(
            f"{len(controls)} controls for horizon {config.horizon_steps}"
        )
    if len(human_pred.velocities) != config.horizon_steps:
        raise DomainError("prediction length does not match the horizon")
    model = model or StickModel(length=c.stick_length)
    roll_model = StickModel(
        length=model.length,
        dt=config.rollout_dt,
        robot_speed_cap=config.speed_cap,
        human_speed_cap=model.human_speed_cap,
    )
    total = 0.0
    discount = 1.0
    for k in range(config.horizon_steps):
        a = human_pred.velocities[k]
        u = controls[k].clamped(config.speed_cap)
        state = dynamics.step(state, a, u, roll_model, c.obstacles)
        running = config.w_obs * obstacle_cost(state, c, config.delta)
        if config.w_ent != 0.0:
            running += config.w_ent * entropy_cost(state, a, u, c, params)
        total += discount * running
        discount *= config.gamma
    total += terminal_cost(state.object, c.goal)
    if config.heading_weight > 0.0:
        dh = normalize_angle(state.object.heading - c.goal.heading)
        total += config.heading_weight * dh * dh
    return total


def _softmin_weights(costs: np.ndarray, lam: float) -> np.ndarray:
    """Normalized softmin weights exp(-(J - J_min)/lam) / sum.

    Degenerate totals (all-inf costs, lam underflow) collapse to a one-hot
    weight on the cheapest sample so the blend always stays defined.
    """
    j_min = costs.min()
    if not np.isfinite(j_min):
        one_hot = np.zeros_like(costs)
        one_hot[int(costs.argmin())] = 1.0
        return one_hot
    shifted = np.exp(-(costs - j_min) / lam)
    total = shifted.sum()
    if not np.isfinite(total) or total <= 0.0:
        one_hot = np.zeros_like(costs)
        one_hot[int(costs.argmin())] = 1.0
        return one_hot
    return shifted / total


def plan(
    state: TeamState,
    c: Context,
    human_history: Sequence[Vec2],
    nominal: Plan | None,
    config: ControllerConfig,
    params: InferenceParams | None = None,
    model: StickModel | None = None,
    diagnostics: bool = True,
) -> Plan:
    """One MPPI update around the time-shifted previous plan.

    Deterministic: the noise matrix is drawn fresh from config.seed on
    every call, so identical inputs reproduce bit-identical plans and the
    perturbation pattern is common across consecutive ticks. Reusing the
    pattern keeps the sampled cost landscape steady as the state advances,
    which is what lets the expected cost decrease smoothly instead of
    jumping with every re-draw.

    With diagnostics the returned Plan carries the blended sequence's own
    rollout (cost, per-step traces, forecast path); without, those fields
    are empty and expected_cost is the softmin-weighted sample cost, saving
    one rollout pass per call. The controls are identical either way.
    """
    params = params or InferenceParams()
    model = model or StickModel(length=c.stick_length)
    T, K = config.horizon_steps, config.samples

    pred = predict_human(human_history, T, model)
    a_pred = np.array(pred.velocities[0].as_tuple())

    if nominal is None or not nominal.controls:
        nom = np.zeros((T, 2))
    else:
        shifted = list(nominal.controls[1:]) + [nominal.controls[-1]]
        shifted = (shifted + [shifted[-1]] * T)[:T]
        nom = np.array([v.as_tuple() for v in shifted])

    rng = np.random.default_rng(config.seed)
    candidates = nom[None, :, :] + rng.normal(0.0, config.noise_sigma, (K, T, 2))
    # Keep the unperturbed warm start as a candidate so the blend never has
    # to regress just because every noise draw happened to be bad.
    candidates[0] = nom
    _clamp_rows(candidates, config.speed_cap)

    costs, _, _, _ = _rollout_batch(state, c, candidates, a_pred, config, params, model)

    weights = _softmin_weights(costs, config.lam)
    blended = np.einsum("k,ktc->tc", weights, candidates)

    controls = tuple(Vec2(float(x), float(y)).clamped(config.speed_cap)
                     for x, y in blended)

    if not diagnostics:
        return Plan(controls=controls,
                    expected_cost=float((weights * costs).sum()))

    final = np.array([v.as_tuple() for v in controls])[None, :, :]
    cost, obs_steps, ent_steps, mids = _rollout_batch(
        state, c, final, a_pred, config, params, model
    )
    return Plan(
        controls=controls,
        expected_cost=float(cost[0]),
        entropy_trace=tuple(float(v) for v in ent_steps[0]),
        obstacle_trace=tuple(float(v) for v in obs_steps[0]),
        path=tuple(Vec2(float(x), float(y)) for x, y in mids[0]),
    )


def _clamp_rows(controls: np.ndarray, cap: float) -> None:
    """Scale every (.., 2) control row down to the speed cap, in place."""
    norms = np.sqrt((controls * controls).sum(-1))
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(norms > cap, cap / norms, 1.0)
    controls *= factor[..., None]


def _rollout_batch(
    state: TeamState,
    c: Context,
    controls: np.ndarray,
    a_pred: np.ndarray,
    config: ControllerConfig,
    params: InferenceParams,
    model: StickModel,
):
    """Roll K control sequences forward and return costs and step traces.

    Mirrors dynamics.step and the scalar cost operations on (K,) arrays.
    The per-step winding update trusts the rollout never to jump half a
    turn in one 0.25 s step; the scalar path's density guard is a trip-wire
    for logged trajectories, not for internal cost previews.
    """
    K, T, _ = controls.shape
    L = model.length
    dt = config.rollout_dt
    centers = np.array([ob.center.as_tuple() for ob in c.obstacles]).reshape(-1, 2)
    m = centers.shape[0]
    goal = np.array(c.goal.position.as_tuple())

    mid = np.broadcast_to(np.array(state.object.position.as_tuple()), (K, 2)).copy()
    theta = np.full(K, state.object.heading)
    w = np.broadcast_to(np.array(state.windings, dtype=float).reshape(1, -1),
                        (K, m)).copy()

    a_stationary = math.hypot(a_pred[0], a_pred[1]) < params.stationary_speed
    cos_phi = math.cos(params.approach_angle)
    sin_phi = math.sin(params.approach_angle)

    obs_steps = np.zeros((K, T))
    ent_steps = np.zeros((K, T))
    mids = np.zeros((K, T, 2))
    costs = np.zeros(K)
    discount = 1.0

    e = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    for k in range(T):
        u = controls[:, k, :]
        rel = a_pred[None, :] - u
        stretch = (rel * e).sum(-1)
        a_r = a_pred[None, :] - e * (0.5 * stretch)[:, None]
        u_r = u + e * (0.5 * stretch)[:, None]
        v = 0.5 * (a_r + u_r)
        diff = a_r - u_r
        omega = (e[:, 0] * diff[:, 1] - e[:, 1] * diff[:, 0]) / L

        mid_new = mid + v * dt
        theta_new = theta + omega * dt

        if m:
            rp = mid[:, None, :] - centers[None, :, :]
            rn = mid_new[:, None, :] - centers[None, :, :]
            cross = rp[:, :, 0] * rn[:, :, 1] - rp[:, :, 1] * rn[:, :, 0]
            dot = (rp * rn).sum(-1)
            w = w + np.arctan2(cross, dot) / (2.0 * math.pi)

        mid, theta = mid_new, theta_new
        mids[:, k, :] = mid
        e = np.stack([np.cos(theta), np.sin(theta)], axis=-1)  # post-step axis

        if m:
            half_arm = e * (0.5 * L)
            obs_steps[:, k] = _barrier(mid - half_arm, mid + half_arm,
                                       centers, config.delta)
            if config.w_ent != 0.0:
                ent_steps[:, k] = _batch_entropy(
                    mid, w, u, a_pred, a_stationary, centers,
                    cos_phi, sin_phi, params,
                )
        costs += discount * (config.w_obs * obs_steps[:, k]
                             + config.w_ent * ent_steps[:, k])
        discount *= config.gamma

    d = mid - goal[None, :]
    costs += (d * d).sum(-1)
    if config.heading_weight > 0.0:
        dh = np.arctan2(np.sin(theta - c.goal.heading),
                        np.cos(theta - c.goal.heading))
        costs += config.heading_weight * dh * dh
    return costs, obs_steps, ent_steps, mids


def _barrier(seg_a: np.ndarray, seg_b: np.ndarray, centers: np.ndarray,
             delta: float) -> np.ndarray:
    """Vectorized obstacle_cost: log-barrier on min segment-center distance."""
    ab = seg_b - seg_a  # (K,2)
    ap = centers[None, :, :] - seg_a[:, None, :]  # (K,m,2)
    denom = (ab * ab).sum(-1)  # (K,)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (ap * ab[:, None, :]).sum(-1) / denom[:, None]
    t = np.clip(np.nan_to_num(t, nan=0.0), 0.0, 1.0)
    closest = seg_a[:, None, :] + t[..., None] * ab[:, None, :]
    gap = centers[None, :, :] - closest
    d = np.sqrt((gap * gap).sum(-1)).min(-1)  # (K,)
    with np.errstate(divide="ignore"):
        cost = np.maximum(0.0, -np.log(d / delta))
    return np.where(d <= 0.0, OBSTACLE_COST_CAP, np.minimum(cost, OBSTACLE_COST_CAP))


def _batch_entropy(
    mid: np.ndarray,
    w: np.ndarray,
    u: np.ndarray,
    a_pred: np.ndarray,
    a_stationary: bool,
    centers: np.ndarray,
    cos_phi: float,
    sin_phi: float,
    params: InferenceParams,
) -> np.ndarray:
    """Posterior entropy per sample at the given (position, winding) states.

    Single-obstacle contexts run fully vectorized. Saturated priors (passed
    obstacles) yield point-mass posteriors and hence zero entropy through
    the same log-domain arithmetic, so no special casing is needed.
    """
    K = mid.shape[0]
    if centers.shape[0] != 1:
        return _batch_entropy_multi(mid, w, u, a_pred, centers, params)
    beta = params.rationality
    p_left = np.clip(0.5 - 2.0 * w[:, 0], 0.0, 1.0)
    p_right = np.clip(0.5 + 2.0 * w[:, 0], 0.0, 1.0)

    to_obs = centers[0][None, :] - mid
    n = np.sqrt((to_obs * to_obs).sum(-1))
    safe_n = np.where(n > 0.0, n, 1.0)
    d = to_obs / safe_n[:, None]
    mode_l = np.stack([cos_phi * d[:, 0] - sin_phi * d[:, 1],
                       sin_phi * d[:, 0] + cos_phi * d[:, 1]], axis=-1)
    mode_r = np.stack([cos_phi * d[:, 0] + sin_phi * d[:, 1],
                       -sin_phi * d[:, 0] + cos_phi * d[:, 1]], axis=-1)

    u_active = np.sqrt((u * u).sum(-1)) >= params.stationary_speed
    score_l = np.zeros(K)
    score_r = np.zeros(K)
    if not a_stationary:
        score_l += (a_pred[None, :] * mode_l).sum(-1)
        score_r += (a_pred[None, :] * mode_r).sum(-1)
    score_l += np.where(u_active, (u * mode_l).sum(-1), 0.0)
    score_r += np.where(u_active, (u * mode_r).sum(-1), 0.0)

    with np.errstate(divide="ignore"):
        logit_l = beta * score_l + np.log(p_left)
        logit_r = beta * score_r + np.log(p_right)
    shift = np.maximum(logit_l, logit_r)
    e_l = np.exp(logit_l - shift)
    e_r = np.exp(logit_r - shift)
    z = e_l + e_r
    pl = e_l / z
    pr = e_r / z
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(np.where(pl > 0.0, pl * np.log(pl), 0.0)
              + np.where(pr > 0.0, pr * np.log(pr), 0.0))
    return np.where(n > 0.0, h, 0.0)


def _batch_entropy_multi(
    mid: np.ndarray,
    w: np.ndarray,
    u: np.ndarray,
    a_pred: np.ndarray,
    centers: np.ndarray,
    params: InferenceParams,
) -> np.ndarray:
    """Slow per-sample fallback for multi-obstacle contexts."""
    beta = params.rationality
    K, m = w.shape
    out = np.zeros(K)
    cos_phi = math.cos(params.approach_angle)
    sin_phi = math.sin(params.approach_angle)
    for i in range(K):
        passed = np.abs(w[i]) >= params.passed_threshold
        active = -1
        best = math.inf
        for j in range(m):
            if passed[j]:
                continue
            d2 = float(((mid[i] - centers[j]) ** 2).sum())
            if d2 < best:
                active, best = j, d2
        factors = []
        for j in range(m):
            pl = min(max(0.5 - 2.0 * w[i, j], 0.0), 1.0)
            pr = min(max(0.5 + 2.0 * w[i, j], 0.0), 1.0)
            if j == active:
                to_obs = centers[j] - mid[i]
                n = math.hypot(to_obs[0], to_obs[1])
                if n > 0.0:
                    dx, dy = to_obs[0] / n, to_obs[1] / n
                    ml = (cos_phi * dx - sin_phi * dy, sin_phi * dx + cos_phi * dy)
                    mr = (cos_phi * dx + sin_phi * dy, -sin_phi * dx + cos_phi * dy)
                    for ax, ay in (tuple(a_pred), (float(u[i, 0]), float(u[i, 1]))):
                        if math.hypot(ax, ay) < params.stationary_speed:
                            continue
                        pl *= math.exp(beta * (ax * ml[0] + ay * ml[1]))
                        pr *= math.exp(beta * (ax * mr[0] + ay * mr[1]))
            factors.append((pl, pr))
        masses = []
        for bits in range(2 ** m):
            mass = 1.0
            for j in range(m):
                side = (bits >> (m - 1 - j)) & 1
                mass *= factors[j][side]
            masses.append(mass)
        total = sum(masses)
        h = 0.0
        if total > 0.0:
            for mass in masses:
                p = mass / total
                if p > 0.0:
                    h -= p * math.log(p)
        out[i] = h
    return out
