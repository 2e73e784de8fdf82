"""Winding-number accumulation and strategy labeling.

A transport trajectory acquires one winding number per obstacle: the net
signed turn of the obstacle-to-object vector, in turns (1 turn = 2*pi).
The tuple of winding signs identifies the workspace-traversal strategy;
with m obstacles there are 2^m strategies.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import CapacityError, DomainError, SamplingDensityError
from .workspace import Obstacle, Vec2, signed_angle

TAU = 2.0 * math.pi

MAX_OBSTACLES = 16


@dataclass(frozen=True)
class StrategyLabel:
    """Tuple of winding-number signs, one per obstacle: -1 left, +1 right."""

    signs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "signs", tuple(int(s) for s in self.signs))
        if not self.signs:
            raise DomainError("strategy label needs at least one sign")
        if any(s not in (-1, 1) for s in self.signs):
            raise DomainError(f"strategy signs must be -1 or +1, got {self.signs!r}")

    def __str__(self) -> str:
        if len(self.signs) == 1:
            return "LEFT" if self.signs[0] < 0 else "RIGHT"
        return "(" + ",".join("L" if s < 0 else "R" for s in self.signs) + ")"


LEFT = StrategyLabel((-1,))
RIGHT = StrategyLabel((1,))


@dataclass(frozen=True)
class WindingAccumulator:
    """Running per-obstacle winding sums plus the last object position."""

    windings: tuple[float, ...]
    last_position: Vec2

    @classmethod
    def start(cls, p0: Vec2, obstacles: Sequence[Obstacle]) -> "WindingAccumulator":
        for ob in obstacles:
            if (p0 - ob.center).norm() == 0.0:
                raise DomainError("object coincides with an obstacle center")
        return cls((0.0,) * len(obstacles), p0)


def winding_step(p_prev: Vec2, p_new: Vec2, center: Vec2) -> float:
    """Single-obstacle winding increment in turns for one step.

    Raises SamplingDensityError when the step spans >= 0.5 turns. The
    principal-value angle cannot represent more than half a turn, so only
    the exactly-antipodal boundary is detectable; denser sampling is the
    caller's responsibility.
    """
    ang = signed_angle(p_prev - center, p_new - center)
    if abs(ang) >= math.pi:
        raise SamplingDensityError(
            "winding step of half a turn or more; sample the trajectory more densely"
        )
    return ang / TAU


def winding_update(
    acc: WindingAccumulator, p_new: Vec2, obstacles: Sequence[Obstacle]
) -> WindingAccumulator:
    """Advance the accumulator to p_new, adding each obstacle's increment."""
    if len(acc.windings) != len(obstacles):
        raise DomainError(
            f"accumulator tracks {len(acc.windings)} obstacles, got {len(obstacles)}"
        )
    updated = tuple(
        w + winding_step(acc.last_position, p_new, ob.center)
        for w, ob in zip(acc.windings, obstacles)
    )
    return WindingAccumulator(updated, p_new)


def sign_with_tiebreak(w: float) -> int:
    """Sign of a winding number; exact zero resolves to -1 (LEFT).

    Zero winding means the path never committed to a side; labels must be
    total, so the tie goes to LEFT by convention.
    """
    return 1 if w > 0.0 else -1


def strategy_label(traj: Iterable[Vec2], obstacles: Sequence[Obstacle]) -> StrategyLabel:
    """Label a densely sampled trajectory by its winding signs."""
    points = list(traj)
    if len(points) < 2:
        raise DomainError("strategy_label needs at least two trajectory points")
    acc = WindingAccumulator.start(points[0], obstacles)
    for p in points[1:]:
        acc = winding_update(acc, p, obstacles)
    return StrategyLabel(tuple(sign_with_tiebreak(w) for w in acc.windings))


def enumerate_strategies(m: int) -> list[StrategyLabel]:
    """All 2^m sign tuples in lexicographic order with -1 < +1.

    For the single-obstacle case this is [LEFT, RIGHT].
    """
    if m < 1:
        raise DomainError("strategy space is empty without obstacles")
    if m > MAX_OBSTACLES:
        raise CapacityError(f"{m} obstacles exceed the {MAX_OBSTACLES}-obstacle cap")
    return [StrategyLabel(signs) for signs in itertools.product((-1, 1), repeat=m)]


def strategy_index(label: StrategyLabel) -> int:
    """Position of a label in enumerate_strategies order."""
    idx = 0
    for s in label.signs:
        idx = idx * 2 + (1 if s > 0 else 0)
    return idx
