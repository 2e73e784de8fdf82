"""Shared helpers for the test suite."""

import math

import numpy as np
import pytest

from cotransport.workspace import Context, Obstacle, Pose2, Rect, TeamState, Vec2


def single_obstacle_context(goal=(0.0, 2.2), center=(0.0, 0.0)) -> Context:
    return Context(
        goal=Pose2(Vec2(*goal), math.pi / 2.0),
        obstacles=(Obstacle(Vec2(*center), 0.075),),
        bounds=Rect(-1.4, -2.8, 1.4, 2.8),
        goal_radius=0.46,
        stick_length=0.914,
    )


def team_state(mid, heading, windings=(0.0,), length=0.914, time=0.0) -> TeamState:
    """Build a consistent TeamState from midpoint and heading."""
    half = length / 2.0
    e = Vec2(math.cos(heading), math.sin(heading))
    mid = Vec2(*mid)
    return TeamState(
        object=Pose2(mid, heading),
        human_end=mid + e * half,
        robot_end=mid - e * half,
        windings=tuple(windings),
        time=time,
    )


def random_unit(rng) -> Vec2:
    ang = rng.uniform(-math.pi, math.pi)
    return Vec2(math.cos(ang), math.sin(ang))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
