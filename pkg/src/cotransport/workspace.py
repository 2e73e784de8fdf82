"""Planar geometry, the task context, and the shared team state.

Frame convention: +x right, +y forward. Trials start near -y and the goal
sits near +y, so passing an obstacle on the +x side accumulates positive
winding (RIGHT) and the -x side negative winding (LEFT). Angles are
counterclockwise-positive and normalized to (-pi, pi].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError

TAU = 2.0 * math.pi

# Rigid-stick consistency tolerances for TeamState validation.
STICK_TOL_M = 1e-6
STICK_TOL_RAD = 1e-6


def normalize_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi]. The -pi boundary maps to +pi."""
    if not math.isfinite(theta):
        raise DomainError(f"non-finite angle: {theta!r}")
    wrapped = math.remainder(theta, TAU)
    if wrapped == -math.pi:
        return math.pi
    return wrapped


@dataclass(frozen=True)
class Vec2:
    """Planar vector in meters (positions) or m/s (velocities)."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise DomainError(f"non-finite Vec2 components: ({self.x!r}, {self.y!r})")

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, k: float) -> "Vec2":
        return Vec2(self.x * k, self.y * k)

    __rmul__ = __mul__

    def __neg__(self) -> "Vec2":
        return Vec2(-self.x, -self.y)

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def cross(self, other: "Vec2") -> float:
        """z component of the 3D cross product (CCW positive)."""
        return self.x * other.y - self.y * other.x

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y)

    def unit(self) -> "Vec2":
        n = self.norm()
        if n == 0.0:
            raise DomainError("cannot normalize the zero vector")
        return Vec2(self.x / n, self.y / n)

    def clamped(self, cap: float) -> "Vec2":
        """Rescale to norm <= cap (exactly, including float round-off)."""
        n = self.norm()
        if n <= cap:
            return self
        f = cap / n
        out = Vec2(self.x * f, self.y * f)
        # One rounding step can leave the norm a few ulp above the cap.
        while out.norm() > cap:
            f = math.nextafter(f, 0.0)
            out = Vec2(self.x * f, self.y * f)
        return out

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


ZERO = Vec2(0.0, 0.0)


@dataclass(frozen=True)
class Pose2:
    """Planar pose of the transported object. Heading is in (-pi, pi]."""

    position: Vec2
    heading: float

    def __post_init__(self):
        object.__setattr__(self, "heading", normalize_angle(self.heading))

    def heading_vector(self) -> Vec2:
        return Vec2(math.cos(self.heading), math.sin(self.heading))


@dataclass(frozen=True)
class Obstacle:
    """Axis-aligned square obstacle (center + half width).

    Costs and inference treat the obstacle as its center point; only
    collision adjudication uses the square boundary.
    """

    center: Vec2
    half_extent: float

    def __post_init__(self):
        if not (math.isfinite(self.half_extent) and self.half_extent > 0.0):
            raise DomainError(f"half_extent must be positive, got {self.half_extent!r}")


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle, used for the workspace bounds."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        vals = (self.xmin, self.ymin, self.xmax, self.ymax)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError(f"non-finite bounds: {vals!r}")
        if self.xmin >= self.xmax or self.ymin >= self.ymax:
            raise DomainError(f"degenerate bounds: {vals!r}")

    def contains(self, p: Vec2) -> bool:
        return self.xmin <= p.x <= self.xmax and self.ymin <= p.y <= self.ymax


@dataclass(frozen=True)
class Context:
    """Task definition: goal pose plus obstacle set, with workspace limits."""

    goal: Pose2
    obstacles: tuple[Obstacle, ...]
    bounds: Rect
    goal_radius: float
    stick_length: float

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        if not (math.isfinite(self.goal_radius) and self.goal_radius > 0.0):
            raise DomainError(f"goal_radius must be positive, got {self.goal_radius!r}")
        if not (math.isfinite(self.stick_length) and self.stick_length > 0.0):
            raise DomainError(f"stick_length must be positive, got {self.stick_length!r}")
        if not self.bounds.contains(self.goal.position):
            raise DomainError("goal lies outside the workspace bounds")
        for ob in self.obstacles:
            if not self.bounds.contains(ob.center):
                raise DomainError("obstacle lies outside the workspace bounds")


@dataclass(frozen=True)
class TeamState:
    """Object pose, endpoint positions/velocities, and accumulated windings.

    The stick is rigid: the object midpoint is the mean of the endpoints and
    the heading points from robot_end to human_end. Constructors reject
    states violating these invariants beyond tight tolerances. `windings`
    holds one running winding-number sum (in turns) per obstacle.
    """

    object: Pose2
    human_end: Vec2
    robot_end: Vec2
    human_vel: Vec2 = ZERO
    robot_vel: Vec2 = ZERO
    windings: tuple[float, ...] = field(default_factory=tuple)
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "windings", tuple(float(w) for w in self.windings))
        mid = Vec2(
            (self.human_end.x + self.robot_end.x) / 2.0,
            (self.human_end.y + self.robot_end.y) / 2.0,
        )
        if (self.object.position - mid).norm() > STICK_TOL_M:
            raise DomainError("object position is not the endpoint midpoint")
        axis = self.human_end - self.robot_end
        if axis.norm() == 0.0:
            raise DomainError("degenerate stick: endpoints coincide")
        heading = math.atan2(axis.y, axis.x)
        err = abs(normalize_angle(heading - self.object.heading))
        if err > STICK_TOL_RAD:
            raise DomainError("object heading does not match the endpoint axis")
        if not math.isfinite(self.time):
            raise DomainError(f"non-finite time: {self.time!r}")

    @property
    def stick_length(self) -> float:
        return (self.human_end - self.robot_end).norm()

    @classmethod
    def from_endpoints(
        cls,
        human_end: Vec2,
        robot_end: Vec2,
        human_vel: Vec2 = ZERO,
        robot_vel: Vec2 = ZERO,
        windings: tuple[float, ...] = (),
        time: float = 0.0,
    ) -> "TeamState":
        """Build a consistent state directly from the two endpoints."""
        axis = human_end - robot_end
        if axis.norm() == 0.0:
            raise DomainError("degenerate stick: endpoints coincide")
        mid = Vec2((human_end.x + robot_end.x) / 2.0, (human_end.y + robot_end.y) / 2.0)
        pose = Pose2(mid, math.atan2(axis.y, axis.x))
        return cls(pose, human_end, robot_end, human_vel, robot_vel, windings, time)

    def validate_against(self, context: Context) -> None:
        """Check the stick length against the context (1e-6 m tolerance)."""
        if abs(self.stick_length - context.stick_length) > STICK_TOL_M:
            raise DomainError(
                f"stick length {self.stick_length:.9f} does not match "
                f"context stick_length {context.stick_length:.9f}"
            )
        if len(self.windings) != len(context.obstacles):
            raise DomainError(
                f"{len(self.windings)} windings for {len(context.obstacles)} obstacles"
            )


def signed_angle(v_from: Vec2, v_to: Vec2) -> float:
    """CCW-positive angle in (-pi, pi] rotating `v_from` onto `v_to`.

    Exactly antiparallel inputs map to +pi, never -pi. Raises DomainError
    for a zero vector on either side (for winding updates that signals the
    object coinciding with an obstacle center).
    """
    if (v_from.x == 0.0 and v_from.y == 0.0) or (v_to.x == 0.0 and v_to.y == 0.0):
        raise DomainError("signed_angle is undefined for zero vectors")
    ang = math.atan2(v_from.cross(v_to), v_from.dot(v_to))
    if ang == -math.pi:
        return math.pi
    return ang


def point_segment_distance(q: Vec2, seg_a: Vec2, seg_b: Vec2) -> float:
    """Euclidean distance from point q to the segment seg_a--seg_b."""
    d = seg_b - seg_a
    dd = d.dot(d)
    if dd == 0.0:
        return (q - seg_a).norm()
    t = (q - seg_a).dot(d) / dd
    t = min(1.0, max(0.0, t))
    nearest = Vec2(seg_a.x + t * d.x, seg_a.y + t * d.y)
    return (q - nearest).norm()


def segment_square_distance(seg_a: Vec2, seg_b: Vec2, ob: Obstacle) -> float:
    """Distance between a segment and a solid axis-aligned square; 0 on contact.

    Used for collision adjudication (the square is physical truth); costs and
    inference use the center point instead.
    """
    cx, cy, h = ob.center.x, ob.center.y, ob.half_extent
    xmin, xmax, ymin, ymax = cx - h, cx + h, cy - h, cy + h

    def inside(p: Vec2) -> bool:
        return xmin <= p.x <= xmax and ymin <= p.y <= ymax

    if inside(seg_a) or inside(seg_b):
        return 0.0

    corners = (
        Vec2(xmin, ymin),
        Vec2(xmax, ymin),
        Vec2(xmax, ymax),
        Vec2(xmin, ymax),
    )
    edges = tuple((corners[i], corners[(i + 1) % 4]) for i in range(4))
    if any(_segments_intersect(seg_a, seg_b, e0, e1) for e0, e1 in edges):
        return 0.0
    return min(_segment_segment_distance(seg_a, seg_b, e0, e1) for e0, e1 in edges)


def _orient(a: Vec2, b: Vec2, c: Vec2) -> float:
    return (b - a).cross(c - a)


def _segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool:
    o1, o2 = _orient(a, b, c), _orient(a, b, d)
    o3, o4 = _orient(c, d, a), _orient(c, d, b)
    if ((o1 > 0) != (o2 > 0)) and ((o3 > 0) != (o4 > 0)) and o1 != 0 and o2 != 0 and o3 != 0 and o4 != 0:
        return True
    # Collinear/touching cases degrade to distance checks by the caller.
    return False


def _segment_segment_distance(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> float:
    return min(
        point_segment_distance(a, c, d),
        point_segment_distance(b, c, d),
        point_segment_distance(c, a, b),
        point_segment_distance(d, a, b),
    )
