"""Scenario files: one JSON document describing a whole experiment cell.

The document bundles the task context, stick model, controller and observer
tuning, the simulated-human policy, the start configurations, and the trial
timeout, so a log can embed its full provenance and two runs of the same
file are comparable. Parsing is strict: unknown kinds, missing fields, and
out-of-range values fail with the offending field named.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Any

from .controller import ControllerConfig
from .dynamics import StickModel
from .errors import DomainError, ScenarioError
from .humansim import HumanPolicy
from .inference import InferenceParams
from .topology import StrategyLabel
from .workspace import Context, Obstacle, Pose2, Rect, TeamState, Vec2

#: The three starting configurations used throughout the evaluation:
#: stick perpendicular to the travel direction, or aligned with the human
#: trailing/leading.
STANDARD_STARTS = ("side-by-side", "human-behind", "human-in-front")

ALGORITHMS = ("icmpc", "vanilla")


@dataclass(frozen=True)
class Scenario:
    name: str
    context: Context
    model: StickModel
    controller: ControllerConfig
    inference: InferenceParams
    human: HumanPolicy
    starts: tuple[str, ...] = STANDARD_STARTS
    timeout: float = 90.0

    def __post_init__(self):
        object.__setattr__(self, "starts", tuple(self.starts))
        for s in self.starts:
            if s not in STANDARD_STARTS:
                raise ScenarioError(f"unknown start configuration {s!r}")
        if not self.starts:
            raise ScenarioError("scenario needs at least one start configuration")
        if not (math.isfinite(self.timeout) and self.timeout > 0.0):
            raise ScenarioError(f"timeout must be positive, got {self.timeout!r}")
        if abs(self.model.length - self.context.stick_length) > 1e-9:
            raise ScenarioError("model length does not match context stick_length")


def study_scenario(
    human_kind: str = "committed",
    target: StrategyLabel | None = StrategyLabel((-1,)),
) -> Scenario:
    """The default desk-scale analogue of the study workspace.

    2.8 x 5.6 m bounds, one square obstacle centered on the start-goal
    line, goal 3.6 m ahead of the start line. A committed human aiming 60
    degrees off the obstacle bearing traces an arc whose width grows with
    the start distance; 1.8 m per leg keeps that arc well inside the half
    width even when the robot exaggerates it.

    Inference here runs with rationality 1.0 rather than the library default:
    the scripted humans signal cleanly, and a sharper likelihood saturates the
    posterior so fast that the entropy cost has nothing left to shape. The
    human walks at 0.5 m/s, faster than the robot's 0.3 m/s cap, so the human
    factor carries a visible share of the evidence.
    """
    context = Context(
        goal=Pose2(Vec2(0.0, 1.8), math.pi / 2.0),
        obstacles=(Obstacle(Vec2(0.0, 0.0), 0.075),),
        bounds=Rect(-1.4, -2.8, 1.4, 2.8),
        goal_radius=0.46,
        stick_length=0.914,
    )
    if human_kind == "compliant":
        target = None
    noise = 0.1 if human_kind == "noisy-committed" else 0.0
    return Scenario(
        name="study",
        context=context,
        model=StickModel(length=context.stick_length),
        controller=ControllerConfig(),
        inference=InferenceParams(rationality=1.0),
        human=HumanPolicy(kind=human_kind, target=target, speed=0.5,
                          noise_sigma=noise),
    )


def start_state(name: str, context: Context) -> TeamState:
    """Initial team state for one of the standard start configurations."""
    half = context.stick_length / 2.0
    mid = Vec2(0.0, -1.8)
    if name == "side-by-side":
        human = Vec2(mid.x + half, mid.y)
        robot = Vec2(mid.x - half, mid.y)
    elif name == "human-behind":
        human = Vec2(mid.x, mid.y - half)
        robot = Vec2(mid.x, mid.y + half)
    elif name == "human-in-front":
        human = Vec2(mid.x, mid.y + half)
        robot = Vec2(mid.x, mid.y - half)
    else:
        raise ScenarioError(f"unknown start configuration {name!r}")
    if not (context.bounds.contains(human) and context.bounds.contains(robot)):
        raise ScenarioError(f"start {name!r} does not fit inside the bounds")
    return TeamState.from_endpoints(
        human, robot, windings=(0.0,) * len(context.obstacles)
    )


def controller_for(scenario: Scenario, algorithm: str) -> ControllerConfig:
    """Controller tuning for an algorithm name; vanilla zeroes w_ent."""
    if algorithm == "icmpc":
        return scenario.controller
    if algorithm == "vanilla":
        return replace(scenario.controller, w_ent=0.0)
    raise ScenarioError(f"unknown algorithm {algorithm!r}")


# ---------------------------------------------------------------------------
# JSON round-trip. Floats serialize via repr, so parse -> dump -> parse is
# the identity. Keys are sorted and separators fixed to keep output stable.


def scenario_to_dict(s: Scenario) -> dict[str, Any]:
    return {
        "name": s.name,
        "context": {
            "goal": {
                "position": list(s.context.goal.position.as_tuple()),
                "heading": s.context.goal.heading,
            },
            "obstacles": [
                {"center": list(ob.center.as_tuple()), "half_extent": ob.half_extent}
                for ob in s.context.obstacles
            ],
            "bounds": [
                s.context.bounds.xmin,
                s.context.bounds.ymin,
                s.context.bounds.xmax,
                s.context.bounds.ymax,
            ],
            "goal_radius": s.context.goal_radius,
            "stick_length": s.context.stick_length,
        },
        "model": {
            "dt": s.model.dt,
            "robot_speed_cap": s.model.robot_speed_cap,
            "human_speed_cap": s.model.human_speed_cap,
        },
        "controller": {
            "horizon_steps": s.controller.horizon_steps,
            "rollout_dt": s.controller.rollout_dt,
            "samples": s.controller.samples,
            "gamma": s.controller.gamma,
            "w_obs": s.controller.w_obs,
            "w_ent": s.controller.w_ent,
            "delta": s.controller.delta,
            "lam": s.controller.lam,
            "noise_sigma": s.controller.noise_sigma,
            "speed_cap": s.controller.speed_cap,
            "seed": s.controller.seed,
            "heading_weight": s.controller.heading_weight,
        },
        "inference": {
            "rationality": s.inference.rationality,
            "passed_threshold": s.inference.passed_threshold,
            "approach_angle": s.inference.approach_angle,
            "stationary_speed": s.inference.stationary_speed,
        },
        "human": {
            "kind": s.human.kind,
            "target": list(s.human.target.signs) if s.human.target else None,
            "noise_sigma": s.human.noise_sigma,
            "speed": s.human.speed,
            "seed": s.human.seed,
        },
        "starts": list(s.starts),
        "timeout": s.timeout,
    }


def _field(d: Any, key: str, path: str) -> Any:
    if not isinstance(d, dict) or key not in d:
        raise ScenarioError(f"missing field {path}.{key}")
    return d[key]


def _vec(raw: Any, path: str) -> Vec2:
    if not (isinstance(raw, (list, tuple)) and len(raw) == 2):
        raise ScenarioError(f"{path} must be a [x, y] pair")
    try:
        return Vec2(float(raw[0]), float(raw[1]))
    except (TypeError, ValueError, DomainError) as e:
        raise ScenarioError(f"bad vector at {path}: {e}") from e


def scenario_from_dict(d: dict[str, Any]) -> Scenario:
    try:
        ctx_d = _field(d, "context", "$")
        goal_d = _field(ctx_d, "goal", "$.context")
        bounds = _field(ctx_d, "bounds", "$.context")
        if not (isinstance(bounds, (list, tuple)) and len(bounds) == 4):
            raise ScenarioError("$.context.bounds must be [xmin, ymin, xmax, ymax]")
        context = Context(
            goal=Pose2(
                _vec(_field(goal_d, "position", "$.context.goal"),
                     "$.context.goal.position"),
                float(_field(goal_d, "heading", "$.context.goal")),
            ),
            obstacles=tuple(
                Obstacle(
                    _vec(_field(ob, "center", f"$.context.obstacles[{i}]"),
                         f"$.context.obstacles[{i}].center"),
                    float(_field(ob, "half_extent", f"$.context.obstacles[{i}]")),
                )
                for i, ob in enumerate(_field(ctx_d, "obstacles", "$.context"))
            ),
            bounds=Rect(*(float(v) for v in bounds)),
            goal_radius=float(_field(ctx_d, "goal_radius", "$.context")),
            stick_length=float(_field(ctx_d, "stick_length", "$.context")),
        )
        model_d = _field(d, "model", "$")
        model = StickModel(
            length=context.stick_length,
            dt=float(_field(model_d, "dt", "$.model")),
            robot_speed_cap=float(_field(model_d, "robot_speed_cap", "$.model")),
            human_speed_cap=float(_field(model_d, "human_speed_cap", "$.model")),
        )
        ctl_d = _field(d, "controller", "$")
        controller = ControllerConfig(
            horizon_steps=int(_field(ctl_d, "horizon_steps", "$.controller")),
            rollout_dt=float(_field(ctl_d, "rollout_dt", "$.controller")),
            samples=int(_field(ctl_d, "samples", "$.controller")),
            gamma=float(_field(ctl_d, "gamma", "$.controller")),
            w_obs=float(_field(ctl_d, "w_obs", "$.controller")),
            w_ent=float(_field(ctl_d, "w_ent", "$.controller")),
            delta=float(_field(ctl_d, "delta", "$.controller")),
            lam=float(_field(ctl_d, "lam", "$.controller")),
            noise_sigma=float(_field(ctl_d, "noise_sigma", "$.controller")),
            speed_cap=float(_field(ctl_d, "speed_cap", "$.controller")),
            seed=int(_field(ctl_d, "seed", "$.controller")),
            heading_weight=float(ctl_d.get("heading_weight", 0.0)),
        )
        inf_d = _field(d, "inference", "$")
        inference = InferenceParams(
            rationality=float(_field(inf_d, "rationality", "$.inference")),
            passed_threshold=float(_field(inf_d, "passed_threshold", "$.inference")),
            approach_angle=float(_field(inf_d, "approach_angle", "$.inference")),
            stationary_speed=float(_field(inf_d, "stationary_speed", "$.inference")),
        )
        hum_d = _field(d, "human", "$")
        raw_target = hum_d.get("target")
        target = (
            StrategyLabel(tuple(int(v) for v in raw_target))
            if raw_target is not None
            else None
        )
        human = HumanPolicy(
            kind=str(_field(hum_d, "kind", "$.human")),
            target=target,
            noise_sigma=float(hum_d.get("noise_sigma", 0.0)),
            speed=float(_field(hum_d, "speed", "$.human")),
            seed=int(hum_d.get("seed", 0)),
        )
        return Scenario(
            name=str(d.get("name", "unnamed")),
            context=context,
            model=model,
            controller=controller,
            inference=inference,
            human=human,
            starts=tuple(str(s) for s in d.get("starts", STANDARD_STARTS)),
            timeout=float(d.get("timeout", 90.0)),
        )
    except ScenarioError:
        raise
    except (DomainError, TypeError, ValueError) as e:
        raise ScenarioError(f"invalid scenario: {e}") from e


def dumps_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), sort_keys=True, separators=(",", ":"))


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except OSError as e:
        raise ScenarioError(f"cannot read scenario {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ScenarioError(
            f"scenario {path} is not valid JSON (line {e.lineno}, col {e.colno}): "
            f"{e.msg}"
        ) from e
    return scenario_from_dict(raw)


def save_scenario(s: Scenario, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps(scenario_to_dict(s), sort_keys=True, indent=2))
        f.write("\n")
