"""Quasistatic stick dynamics: rigidity, analytic cases, prediction."""

import math

import numpy as np
import pytest

from conftest import single_obstacle_context, team_state
from cotransport.dynamics import (
    DEFAULT_DT,
    DEFAULT_HUMAN_SPEED_CAP,
    DEFAULT_ROBOT_SPEED_CAP,
    HumanPrediction,
    StickModel,
    predict_human,
    step,
)
from cotransport.errors import DomainError
from cotransport.topology import winding_step
from cotransport.workspace import Obstacle, Vec2

MODEL = StickModel(length=0.914)


def test_model_validation():
    with pytest.raises(DomainError):
        StickModel(length=0.0)
    with pytest.raises(DomainError):
        StickModel(length=1.0, dt=0.0)
    with pytest.raises(DomainError):
        StickModel(length=1.0, robot_speed_cap=-0.1)


def test_rigidity_over_many_random_steps(rng):
    s = team_state((0.0, 0.0), 0.3, windings=())
    for _ in range(10_000):
        a = Vec2(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5))
        u = Vec2(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5))
        s = step(s, a, u, MODEL)
        assert abs(s.stick_length - MODEL.length) <= 1e-9
    assert s.time == pytest.approx(10_000 * DEFAULT_DT, rel=1e-9)


def test_pure_translation_matches_closed_form():
    v = Vec2(0.12, -0.05)
    s0 = team_state((0.3, -1.0), 0.7, windings=())
    s1 = step(s0, v, v, MODEL)
    dt = MODEL.dt
    assert s1.object.position.x == pytest.approx(0.3 + v.x * dt, abs=1e-12)
    assert s1.object.position.y == pytest.approx(-1.0 + v.y * dt, abs=1e-12)
    assert s1.object.heading == pytest.approx(0.7, abs=1e-12)
    assert s1.human_end.x == pytest.approx(s0.human_end.x + v.x * dt, abs=1e-12)
    assert s1.human_end.y == pytest.approx(s0.human_end.y + v.y * dt, abs=1e-12)
    # Both rigid-consistent velocities equal the commanded translation.
    assert s1.human_vel == v
    assert s1.robot_vel == v


def test_pure_rotation_matches_closed_form():
    th = 0.4
    s0 = team_state((0.0, 0.0), th, windings=())
    k = 0.2
    n = Vec2(-math.sin(th), math.cos(th))  # perpendicular to the stick axis
    s1 = step(s0, n * k, n * -k, MODEL)
    dt = MODEL.dt
    omega = 2.0 * k / MODEL.length
    assert s1.object.position.x == pytest.approx(0.0, abs=1e-12)
    assert s1.object.position.y == pytest.approx(0.0, abs=1e-12)
    assert s1.object.heading == pytest.approx(th + omega * dt, abs=1e-12)


def test_stretch_split_equally():
    # Human pulls along the stick axis, robot holds: each end gives half.
    s0 = team_state((0.0, 0.0), 0.0, windings=())
    a = Vec2(0.2, 0.0)
    s1 = step(s0, a, Vec2(0.0, 0.0), MODEL)
    assert s1.object.position.x == pytest.approx(0.1 * MODEL.dt, abs=1e-12)
    assert s1.object.heading == pytest.approx(0.0, abs=1e-12)
    assert s1.human_vel.x == pytest.approx(0.1, abs=1e-12)
    assert s1.robot_vel.x == pytest.approx(0.1, abs=1e-12)


def test_commands_are_clamped_to_caps():
    s0 = team_state((0.0, 0.0), 0.0, windings=())
    big = Vec2(50.0, 0.0)
    capped_a = big.clamped(MODEL.human_speed_cap)
    capped_u = big.clamped(MODEL.robot_speed_cap)
    s_big = step(s0, big, big, MODEL)
    s_cap = step(s0, capped_a, capped_u, MODEL)
    assert s_big == s_cap


def test_windings_track_midpoint():
    c = single_obstacle_context()
    s0 = team_state((0.8, -0.05), 0.0, windings=(0.0,))
    u = Vec2(0.0, 0.25)
    s1 = step(s0, u, u, MODEL, c.obstacles)
    want = winding_step(s0.object.position, s1.object.position, c.obstacles[0].center)
    assert s1.windings[0] == pytest.approx(want, abs=1e-15)
    assert len(s1.windings) == 1


def test_step_rejects_mismatched_state():
    with pytest.raises(DomainError):
        step(team_state((0, 0), 0.0, windings=(), length=0.8), Vec2(0, 0), Vec2(0, 0), MODEL)
    with pytest.raises(DomainError):
        # One obstacle but no winding slots.
        step(
            team_state((0, 0), 0.0, windings=()),
            Vec2(0, 0),
            Vec2(0, 0),
            MODEL,
            (Obstacle(Vec2(3, 3), 0.075),),
        )


def test_step_is_deterministic():
    s0 = team_state((0.1, -0.9), 0.25, windings=())
    a, u = Vec2(0.21, -0.07), Vec2(-0.1, 0.3)
    s1 = step(s0, a, u, MODEL)
    s2 = step(s0, a, u, MODEL)
    assert s1 == s2


def test_predict_human_repeats_latest_sample():
    pred = predict_human([Vec2(0.1, 0.0), Vec2(0.2, 0.1)], 4, MODEL)
    assert isinstance(pred, HumanPrediction)
    assert len(pred.velocities) == 4
    assert all(v == Vec2(0.2, 0.1) for v in pred.velocities)


def test_predict_human_clamps_and_handles_empty():
    pred = predict_human([], 3, MODEL)
    assert all(v == Vec2(0.0, 0.0) for v in pred.velocities)
    fast = predict_human([Vec2(9.0, 0.0)], 2, MODEL)
    assert fast.velocities[0].norm() <= DEFAULT_HUMAN_SPEED_CAP
    with pytest.raises(DomainError):
        predict_human([Vec2(0.1, 0.0)], 0, MODEL)


def test_default_rates():
    assert DEFAULT_DT == pytest.approx(1.0 / 15.0)
    assert DEFAULT_ROBOT_SPEED_CAP == 0.3
    assert DEFAULT_HUMAN_SPEED_CAP == 1.0
