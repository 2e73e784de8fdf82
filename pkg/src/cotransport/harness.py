"""Seeded trial runner, JSON Lines trajectory logs, and objective metrics.

A trial is a 15 Hz closed loop: the simulated (or live) human commands a
velocity, the controller replans and executes its first control, the stick
dynamics advance, and the observer's posterior over passing strategies is
logged. TrialEngine owns one tick of that loop so the offline runner here
and the real-time session service execute byte-for-byte identical physics.

Log format (one JSON object per line):
  line 0    config echo {algorithm, scenario, seed, start}
  line 1    initial pseudo-record (t = 0, zero actions, prior posterior)
  line 2..  one record per tick: post-step state plus the actions that
            produced it (fields t, object, human_end, robot_end, a, u,
            posterior, entropy, j_obs, j_ent, w)
  last line outcome record {outcome, final_label, t_final}
Units: meters, m/s, seconds, nats. The posterior in record i is evaluated
at the state of record i-1 (where those actions were chosen).
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from collections import Counter
from dataclasses import dataclass, replace
from typing import Any, Sequence

import numpy as np

from . import controller, dynamics, inference
from .errors import DomainError, LogIntegrityError, ScenarioError
from .humansim import act
from .inference import StrategyDistribution
from .scenario import (
    Scenario,
    controller_for,
    scenario_from_dict,
    scenario_to_dict,
    start_state,
)
from .topology import StrategyLabel, sign_with_tiebreak
from .workspace import (
    Context,
    Pose2,
    TeamState,
    Vec2,
    ZERO,
    segment_square_distance,
)

OUTCOMES = ("success", "collision", "out-of-bounds", "timeout")

_M64 = (1 << 64) - 1


def _fnv1a64(s: str) -> int:
    h = 0xCBF29CE484222325
    for b in s.encode("utf-8"):
        h = ((h ^ b) * 0x100000001B3) & _M64
    return h


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _M64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return (z ^ (z >> 31)) & _M64


def derive_seed(base_seed: int, algorithm: str, start: str, trial_index: int) -> int:
    """Per-trial seed: splitmix64 absorption of the cell coordinates.

    Each token (FNV-1a hash of the algorithm name, FNV-1a hash of the start
    name, the trial index) is XOR-absorbed and diffused, so cells and trials
    get decorrelated streams while staying reproducible from the base seed.
    """
    if base_seed < 0 or trial_index < 0:
        raise DomainError("seeds and trial indices must be nonnegative")
    x = base_seed & _M64
    for token in (_fnv1a64(algorithm), _fnv1a64(start), trial_index):
        x = _splitmix64(x ^ (token & _M64))
    return x


@dataclass(frozen=True)
class TrialConfig:
    """One cell of an experiment: scenario + start + algorithm + seed."""

    scenario: Scenario
    start: str | TeamState
    algorithm: str
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ("icmpc", "vanilla"):
            raise ScenarioError(f"unknown algorithm {self.algorithm!r}")
        if self.seed < 0:
            raise ScenarioError(f"seed must be nonnegative, got {self.seed}")
        if isinstance(self.start, str) and self.start not in self.scenario.starts:
            raise ScenarioError(
                f"start {self.start!r} is not one of the scenario starts"
            )


@dataclass(frozen=True)
class TickRecord:
    t: float
    object: tuple[float, float, float]  # x, y, heading
    human_end: tuple[float, float]
    robot_end: tuple[float, float]
    a: tuple[float, float]
    u: tuple[float, float]
    posterior: tuple[float, ...]
    entropy: float
    j_obs: float
    j_ent: float
    w: tuple[float, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "t": self.t,
            "object": list(self.object),
            "human_end": list(self.human_end),
            "robot_end": list(self.robot_end),
            "a": list(self.a),
            "u": list(self.u),
            "posterior": list(self.posterior),
            "entropy": self.entropy,
            "j_obs": self.j_obs,
            "j_ent": self.j_ent,
            "w": list(self.w),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "TickRecord":
        try:
            return cls(
                t=float(d["t"]),
                object=tuple(float(v) for v in d["object"]),
                human_end=tuple(float(v) for v in d["human_end"]),
                robot_end=tuple(float(v) for v in d["robot_end"]),
                a=tuple(float(v) for v in d["a"]),
                u=tuple(float(v) for v in d["u"]),
                posterior=tuple(float(v) for v in d["posterior"]),
                entropy=float(d["entropy"]),
                j_obs=float(d["j_obs"]),
                j_ent=float(d["j_ent"]),
                w=tuple(float(v) for v in d["w"]),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise LogIntegrityError(f"malformed tick record: {e}") from e

    def state(self) -> TeamState:
        """Reconstruct the post-step team state this record captured."""
        return TeamState(
            object=Pose2(Vec2(self.object[0], self.object[1]), self.object[2]),
            human_end=Vec2(*self.human_end),
            robot_end=Vec2(*self.robot_end),
            windings=self.w,
            time=self.t,
        )


@dataclass(frozen=True)
class TrialLog:
    config: TrialConfig
    records: tuple[TickRecord, ...]
    outcome: str
    final_label: StrategyLabel | None

    def entropies(self) -> list[float]:
        return [r.entropy for r in self.records]

    def duration(self) -> float:
        return self.records[-1].t if self.records else 0.0


class TrialEngine:
    """One closed-loop trial, advanced a tick at a time.

    The engine owns the controller warm start, the observer's 10 Hz human
    velocity samples, and the running belief; callers (offline runner or
    live session) only supply the human command per tick.
    """

    def __init__(self, cfg: TrialConfig, plan_details: bool = False):
        self.cfg = cfg
        self.plan_details = plan_details
        sc = cfg.scenario
        self.context: Context = sc.context
        self.model = sc.model
        self.params = sc.inference
        self.ctrl = replace(controller_for(sc, cfg.algorithm), seed=cfg.seed)
        if isinstance(cfg.start, str):
            self.state = start_state(cfg.start, sc.context)
        else:
            self.state = cfg.start
        self.state.validate_against(sc.context)
        self.tick = 0
        self.history: list[Vec2] = []
        self.nominal: controller.Plan | None = None
        self.outcome: str | None = None
        self.belief: StrategyDistribution | None = None
        self.records: list[TickRecord] = [self._initial_record()]

    def _initial_record(self) -> TickRecord:
        s = self.state
        if self.context.obstacles:
            post = inference.posterior(ZERO, ZERO, s, self.context, self.params)
            probs = post.probs
            ent = post.entropy()
            self.belief = post
        else:
            probs, ent = (), 0.0
        return TickRecord(
            t=s.time,
            object=(s.object.position.x, s.object.position.y, s.object.heading),
            human_end=s.human_end.as_tuple(),
            robot_end=s.robot_end.as_tuple(),
            a=(0.0, 0.0),
            u=(0.0, 0.0),
            posterior=probs,
            entropy=ent,
            j_obs=controller.obstacle_cost(s, self.context, self.ctrl.delta),
            j_ent=ent,
            w=s.windings,
        )

    def step_once(self, a_cmd: Vec2) -> tuple[TickRecord, controller.Plan]:
        """Run one 15 Hz tick: plan, step the dynamics, log, adjudicate."""
        if self.outcome is not None:
            raise DomainError("trial already finished")
        a = a_cmd.clamped(self.model.human_speed_cap)
        plan = controller.plan(
            self.state, self.context, self.history, self.nominal,
            self.ctrl, self.params, self.model,
            diagnostics=self.plan_details,
        )
        u = plan.controls[0]
        pre = self.state
        new_state = dynamics.step(pre, a, u, self.model, self.context.obstacles)

        if self.context.obstacles:
            post = inference.posterior(a, u, pre, self.context, self.params)
            probs = post.probs
            ent = post.entropy()
            self.belief = post
        else:
            probs, ent = (), 0.0

        record = TickRecord(
            t=new_state.time,
            object=(
                new_state.object.position.x,
                new_state.object.position.y,
                new_state.object.heading,
            ),
            human_end=new_state.human_end.as_tuple(),
            robot_end=new_state.robot_end.as_tuple(),
            a=a.as_tuple(),
            u=u.as_tuple(),
            posterior=probs,
            entropy=ent,
            j_obs=controller.obstacle_cost(new_state, self.context, self.ctrl.delta),
            j_ent=ent,
            w=new_state.windings,
        )
        self.records.append(record)

        # Observer samples the commanded human velocity at 10 Hz: the sample
        # fires on ticks where floor(2n/3) advances (15 Hz -> 10 Hz cadence).
        n = self.tick + 1
        if (2 * n) // 3 > (2 * self.tick) // 3:
            self.history.append(a)

        self.state = new_state
        self.nominal = plan
        self.tick = n
        self.outcome = self._adjudicate(new_state)
        return record, plan

    def _adjudicate(self, s: TeamState) -> str | None:
        """Terminal outcome, or None while the trial continues.

        Checked in order collision, out-of-bounds, success, timeout: a tick
        that both collides and reaches the goal counts as a collision.
        """
        if self.context.obstacles:
            d = min(
                segment_square_distance(s.robot_end, s.human_end, ob)
                for ob in self.context.obstacles
            )
            if d <= 0.0:
                return "collision"
        if not (
            self.context.bounds.contains(s.human_end)
            and self.context.bounds.contains(s.robot_end)
        ):
            return "out-of-bounds"
        g = self.context.goal.position
        reach = min(
            (s.object.position - g).norm(),
            (s.human_end - g).norm(),
            (s.robot_end - g).norm(),
        )
        if reach <= self.context.goal_radius:
            return "success"
        if s.time >= self.cfg.scenario.timeout - 1e-9:
            return "timeout"
        return None

    def final_label(self) -> StrategyLabel | None:
        if not self.context.obstacles:
            return None
        return StrategyLabel(
            tuple(sign_with_tiebreak(w) for w in self.state.windings)
        )


def run_trial(cfg: TrialConfig) -> TrialLog:
    """Run one seeded closed-loop trial against the scenario's human policy."""
    engine = TrialEngine(cfg)
    policy = replace(cfg.scenario.human, seed=cfg.seed)
    while engine.outcome is None:
        a = act(policy, engine.state, engine.context, engine.belief, engine.params)
        engine.step_once(a)
    return TrialLog(
        config=cfg,
        records=tuple(engine.records),
        outcome=engine.outcome,
        final_label=engine.final_label(),
    )


# ---------------------------------------------------------------------------
# Serialization


def _json_line(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def dumps_log(log: TrialLog) -> str:
    lines = [
        _json_line(
            {
                "algorithm": log.config.algorithm,
                "scenario": scenario_to_dict(log.config.scenario),
                "seed": log.config.seed,
                "start": log.config.start
                if isinstance(log.config.start, str)
                else "explicit",
            }
        )
    ]
    lines.extend(_json_line(r.to_dict()) for r in log.records)
    lines.append(
        _json_line(
            {
                "outcome": log.outcome,
                "final_label": list(log.final_label.signs) if log.final_label else None,
                "t_final": log.records[-1].t if log.records else 0.0,
            }
        )
    )
    return "\n".join(lines) + "\n"


def dump_log(log: TrialLog, path: str) -> None:
    """Write atomically: a partial file is never left at `path`."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(dumps_log(log))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def loads_log(text: str) -> TrialLog:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 3:
        raise LogIntegrityError("log needs a config line, records, and an outcome")
    try:
        head = json.loads(lines[0])
        tail = json.loads(lines[-1])
        body = [json.loads(ln) for ln in lines[1:-1]]
    except json.JSONDecodeError as e:
        raise LogIntegrityError(f"log is not valid JSON Lines: {e}") from e
    if "scenario" not in head or "outcome" not in tail:
        raise LogIntegrityError("log config or outcome line missing")
    scenario = scenario_from_dict(head["scenario"])
    records = tuple(TickRecord.from_dict(d) for d in body)
    start = head.get("start", "explicit")
    if start == "explicit":
        start_obj: str | TeamState = records[0].state()
    else:
        start_obj = start
    cfg = TrialConfig(
        scenario=scenario,
        start=start_obj,
        algorithm=str(head.get("algorithm", "icmpc")),
        seed=int(head.get("seed", 0)),
    )
    raw_label = tail.get("final_label")
    label = StrategyLabel(tuple(int(v) for v in raw_label)) if raw_label else None
    outcome = str(tail["outcome"])
    if outcome not in OUTCOMES:
        raise LogIntegrityError(f"unknown outcome {outcome!r}")
    return TrialLog(cfg, records, outcome, label)


def load_log(path: str) -> TrialLog:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return loads_log(f.read())
    except OSError as e:
        raise LogIntegrityError(f"cannot read log {path}: {e}") from e


def verify_log(log: TrialLog, tol: float = 1e-9) -> None:
    """Replay the recorded actions through the dynamics and compare states.

    Raises LogIntegrityError on the first tick whose recorded state deviates
    from the recomputed one by more than `tol` in any field; catches edited
    logs and drifted dynamics alike.
    """
    if not log.records:
        raise LogIntegrityError("log has no records")
    sc = log.config.scenario
    try:
        state = log.records[0].state()
        state.validate_against(sc.context)
    except DomainError as e:
        raise LogIntegrityError(f"record 0 is not a consistent state: {e}") from e
    for i, rec in enumerate(log.records[1:], start=1):
        state = dynamics.step(
            state, Vec2(*rec.a), Vec2(*rec.u), sc.model, sc.context.obstacles
        )
        try:
            got = rec.state()
        except DomainError as e:
            raise LogIntegrityError(
                f"record {i} is not a consistent state: {e}"
            ) from e
        deviations = {
            "object.x": abs(state.object.position.x - got.object.position.x),
            "object.y": abs(state.object.position.y - got.object.position.y),
            "heading": abs(state.object.heading - got.object.heading),
            "human_end": (state.human_end - got.human_end).norm(),
            "robot_end": (state.robot_end - got.robot_end).norm(),
            "time": abs(state.time - got.time),
        }
        for j, (w_exp, w_got) in enumerate(zip(state.windings, got.windings)):
            deviations[f"w[{j}]"] = abs(w_exp - w_got)
        field, err = max(deviations.items(), key=lambda kv: kv[1])
        if err > tol:
            raise LogIntegrityError(
                f"replay diverged at record {i}: {field} off by {err:.3e}"
            )


# ---------------------------------------------------------------------------
# Metrics


@dataclass(frozen=True)
class MetricsReport:
    trials: int
    successes: int
    success_rate: float
    completion_mean: float  # NaN when no successes
    completion_sd: float
    human_accel_mean: float
    entropy_trace: tuple[float, ...]  # 100 bins over normalized time
    strategy_split: dict[str, int]

    def to_dict(self) -> dict[str, Any]:
        return {
            "trials": self.trials,
            "successes": self.successes,
            "success_rate": self.success_rate,
            "completion_mean_s": self.completion_mean,
            "completion_sd_s": self.completion_sd,
            "human_accel_mean_ms2": self.human_accel_mean,
            "entropy_trace": list(self.entropy_trace),
            "strategy_split": dict(self.strategy_split),
        }

    def table(self) -> str:
        rows = [
            ("trials", f"{self.trials}"),
            ("successes", f"{self.successes}"),
            ("success rate", f"{100.0 * self.success_rate:.1f}%"),
            ("completion time", f"{self.completion_mean:.2f} +- "
                                f"{self.completion_sd:.2f} s"),
            ("human |accel|", f"{self.human_accel_mean:.3f} m/s^2"),
            ("entropy @ 50% t", f"{self.entropy_trace[50]:.4f} nats"),
            ("strategy split", ", ".join(f"{k}: {v}"
                                         for k, v in sorted(
                                             self.strategy_split.items()))
                               or "n/a"),
        ]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


ENTROPY_BINS = 100


def _resample_trace(values: Sequence[float], bins: int) -> np.ndarray:
    ys = np.asarray(values, dtype=float)
    if ys.size == 1:
        return np.full(bins, ys[0])
    xs = np.linspace(0.0, 1.0, ys.size)
    return np.interp(np.linspace(0.0, 1.0, bins), xs, ys)


def _sampled_indices(n_records: int) -> list[int]:
    """Record indices at the observer's 10 Hz cadence (see TrialEngine)."""
    out = []
    for i in range(1, n_records):
        if (2 * i) // 3 > (2 * (i - 1)) // 3:
            out.append(i)
    return out


def compute_metrics(logs: Sequence[TrialLog]) -> MetricsReport:
    """Aggregate outcomes per the study's objective metrics.

    Completion time and human acceleration are over successes only;
    acceleration is the mean finite-difference magnitude of the human
    command at the 10 Hz observer cadence, without smoothing.
    """
    if not logs:
        raise DomainError("compute_metrics needs at least one log")
    successes = [lg for lg in logs if lg.outcome == "success"]
    times = np.array([lg.duration() for lg in successes])

    accels: list[float] = []
    for lg in successes:
        idx = _sampled_indices(len(lg.records))
        vs = np.array([lg.records[i].a for i in idx])
        if len(vs) >= 2:
            dv = np.diff(vs, axis=0) / 0.1
            accels.append(float(np.hypot(dv[:, 0], dv[:, 1]).mean()))

    traces = np.array(
        [_resample_trace(lg.entropies(), ENTROPY_BINS) for lg in logs]
    )
    split = Counter(
        str(lg.final_label) for lg in logs if lg.final_label is not None
    )
    return MetricsReport(
        trials=len(logs),
        successes=len(successes),
        success_rate=len(successes) / len(logs),
        completion_mean=float(times.mean()) if len(times) else math.nan,
        completion_sd=float(times.std()) if len(times) else math.nan,
        human_accel_mean=float(np.mean(accels)) if accels else math.nan,
        entropy_trace=tuple(float(v) for v in traces.mean(axis=0)),
        strategy_split=dict(split),
    )
