"""End-to-end tests for the websocket session service.

Every test starts a real server on an ephemeral port and drives it through a
real client connection, so the wire format, pacing, and error handling are
exercised exactly as a browser client would see them. Real-time tests keep
wall-clock windows short and assert on frame contents rather than precise
arrival times.
"""

from __future__ import annotations

import asyncio
import json
import math
from contextlib import asynccontextmanager
from dataclasses import replace

import pytest
from websockets.asyncio.client import connect
from websockets.exceptions import ConnectionClosed

from cotransport.harness import TrialConfig, TrialEngine
from cotransport.scenario import scenario_to_dict, study_scenario
from cotransport.session import PROTOCOL_VERSION, serve
from cotransport.workspace import Vec2

RECV_TIMEOUT = 5.0

# Scripted human inputs for lockstep runs; six ticks ends a 0.4 s trial.
SCRIPT = [
    (0.12, 0.0),
    (0.0, 0.2),
    (-0.1, 0.08),
    (0.25, -0.05),
    (0.0, 0.0),
    (0.1, 0.3),
]


def run(coro):
    asyncio.run(coro)


def quick_scenario():
    return replace(study_scenario(), timeout=0.4)


@asynccontextmanager
async def server_uri(scenario=None):
    server = await serve(0, scenario)
    try:
        port = server.sockets[0].getsockname()[1]
        yield f"ws://127.0.0.1:{port}"
    finally:
        server.close()
        await server.wait_closed()


async def send(ws, obj):
    await ws.send(json.dumps(obj))


async def recv(ws, timeout=RECV_TIMEOUT):
    return json.loads(await asyncio.wait_for(ws.recv(), timeout))


async def next_of_type(ws, kind, others=None, timeout=RECV_TIMEOUT):
    """Read frames until one of `kind` arrives; stash the rest in `others`."""
    while True:
        frame = await recv(ws, timeout)
        if frame["type"] == kind:
            return frame
        if others is not None:
            others.append(frame)


async def start_session(ws, **extra):
    msg = {"type": "hello", "protocol_version": PROTOCOL_VERSION}
    msg.update(extra)
    await send(ws, msg)
    return await next_of_type(ws, "state")


def payload(frame):
    """State-frame fields minus the envelope, comparable to a tick record."""
    d = dict(frame)
    d.pop("type")
    d.pop("tick")
    return d


def as_wire(record):
    """A record dict as it looks after a JSON round trip (tuples -> lists)."""
    return json.loads(json.dumps(record.to_dict()))


def test_hello_answers_with_the_initial_state_quickly():
    sc = study_scenario()

    async def main():
        async with server_uri(sc) as uri:
            async with connect(uri) as ws:
                t0 = asyncio.get_running_loop().time()
                frame = await start_session(ws, lockstep=True)
                elapsed = asyncio.get_running_loop().time() - t0
                assert elapsed < 0.2
                assert frame["tick"] == 0
                cfg = TrialConfig(
                    scenario=sc, start=sc.starts[0], algorithm="icmpc", seed=0
                )
                assert payload(frame) == as_wire(TrialEngine(cfg).records[0])

    run(main())


def test_hello_accepts_an_inline_scenario_and_start():
    sc = quick_scenario()

    async def main():
        async with server_uri() as uri:  # server default ignored by this hello
            async with connect(uri) as ws:
                frame = await start_session(
                    ws,
                    lockstep=True,
                    scenario=scenario_to_dict(sc),
                    start="human-behind",
                    algorithm="vanilla",
                    seed=11,
                )
                cfg = TrialConfig(
                    scenario=sc, start="human-behind", algorithm="vanilla", seed=11
                )
                assert payload(frame) == as_wire(TrialEngine(cfg).records[0])

    run(main())


def test_wrong_protocol_version_is_rejected():
    async def main():
        async with server_uri() as uri:
            async with connect(uri) as ws:
                await send(ws, {"type": "hello", "protocol_version": "0"})
                frame = await recv(ws)
                assert frame["type"] == "error"
                assert frame["code"] == "protocol-version"
                assert PROTOCOL_VERSION in frame["text"]
                with pytest.raises(ConnectionClosed):
                    await asyncio.wait_for(ws.recv(), RECV_TIMEOUT)

    run(main())


def test_bad_hello_variants_get_an_error_and_a_close():
    cases = [
        json.dumps({"type": "human_input", "vx": 0, "vy": 0}),  # not a hello
        "}{ not json",
        json.dumps([1, 2, 3]),  # not an object
        json.dumps(
            {
                "type": "hello",
                "protocol_version": PROTOCOL_VERSION,
                "scenario": {"name": "broken"},
            }
        ),
        json.dumps(
            {
                "type": "hello",
                "protocol_version": PROTOCOL_VERSION,
                "algorithm": "mystery",
            }
        ),
    ]

    async def main():
        async with server_uri() as uri:
            for raw in cases:
                async with connect(uri) as ws:
                    await ws.send(raw)
                    frame = await recv(ws)
                    assert frame["type"] == "error", raw
                    assert frame["code"] == "bad-hello", raw
                    with pytest.raises(ConnectionClosed):
                        await asyncio.wait_for(ws.recv(), RECV_TIMEOUT)

    run(main())


def test_lockstep_reproduces_the_offline_engine():
    sc = quick_scenario()
    cfg = TrialConfig(scenario=sc, start="side-by-side", algorithm="icmpc", seed=5)

    async def main():
        async with server_uri(sc) as uri:
            async with connect(uri) as ws:
                await start_session(ws, lockstep=True, start="side-by-side", seed=5)
                offline = TrialEngine(cfg, plan_details=True)
                extras = []
                worst = 0.0
                for k, (vx, vy) in enumerate(SCRIPT, start=1):
                    await send(ws, {"type": "human_input", "vx": vx, "vy": vy})
                    frame = await next_of_type(ws, "state", others=extras)
                    rec, _ = offline.step_once(Vec2(vx, vy))
                    assert frame["tick"] == k
                    assert payload(frame) == as_wire(rec)
                    dx = frame["object"][0] - rec.object[0]
                    dy = frame["object"][1] - rec.object[1]
                    worst = max(worst, math.hypot(dx, dy))
                assert worst <= 1e-6
                outcome = await next_of_type(ws, "outcome", others=extras)
                assert offline.outcome == "timeout"
                assert outcome["outcome"] == offline.outcome
                assert outcome["final_label"] == list(offline.final_label().signs)
                assert outcome["t_final"] == offline.state.time

                plans = [f for f in extras if f["type"] == "plan"]
                assert len(plans) == 2  # every fifth tick (1, 6); 6 is also final
                for p in plans:
                    assert math.isfinite(p["expected_cost"])
                    assert len(p["path"]) >= 2
                    for q in p["path"]:
                        assert len(q) == 2
                        assert all(math.isfinite(c) for c in q)
                assert plans[0]["t"] == pytest.approx(1 / 15)
                assert plans[1]["t"] == pytest.approx(0.4)
                assert not any(f["type"] == "error" for f in extras)

    run(main())


def test_protocol_errors_are_reported_and_survivable():
    sc = quick_scenario()

    async def main():
        async with server_uri(sc) as uri:
            async with connect(uri) as ws:
                await start_session(ws, lockstep=True)
                await ws.send("}{ definitely not json")
                err = await next_of_type(ws, "error")
                assert err["code"] == "bad-json"
                await send(ws, {"type": "mystery"})
                err = await next_of_type(ws, "error")
                assert err["code"] == "bad-message"
                assert "mystery" in err["text"]
                await send(ws, {"type": "human_input", "vx": "fast", "vy": 0})
                err = await next_of_type(ws, "error")
                assert err["code"] == "bad-message"
                assert "human_input" in err["text"]
                await send(ws, {"type": "human_input", "vy": 0.1})
                err = await next_of_type(ws, "error")
                assert err["code"] == "bad-message"
                await send(ws, {"type": "hello", "protocol_version": PROTOCOL_VERSION})
                err = await next_of_type(ws, "error")
                assert err["code"] == "bad-message"
                assert "already started" in err["text"]
                await send(ws, {"type": "reset", "seed": "abc"})
                err = await next_of_type(ws, "error")
                assert err["code"] == "bad-message"
                assert "reset" in err["text"]
                # the session still steps after all of that
                await send(ws, {"type": "human_input", "vx": 0.1, "vy": 0.0})
                frame = await next_of_type(ws, "state")
                assert frame["tick"] == 1

    run(main())


def test_reset_restarts_an_identical_trial():
    sc = quick_scenario()
    script = SCRIPT[:3]

    async def main():
        async with server_uri(sc) as uri:
            async with connect(uri) as ws:
                first0 = await start_session(ws, lockstep=True, seed=9)
                extras = []
                run1 = []
                for vx, vy in script:
                    await send(ws, {"type": "human_input", "vx": vx, "vy": vy})
                    run1.append(await next_of_type(ws, "state", others=extras))
                await send(ws, {"type": "reset"})  # no seed: reuse the last one
                fresh0 = await next_of_type(ws, "state", others=extras)
                assert fresh0 == first0
                run2 = []
                for vx, vy in script:
                    await send(ws, {"type": "human_input", "vx": vx, "vy": vy})
                    run2.append(await next_of_type(ws, "state", others=extras))
                assert run2 == run1
                # an interrupted trial reports no outcome
                assert not any(f["type"] == "outcome" for f in extras)

    run(main())


def test_reset_with_a_new_seed_diverges():
    sc = quick_scenario()

    async def main():
        async with server_uri(sc) as uri:
            async with connect(uri) as ws:
                await start_session(ws, lockstep=True, seed=9)
                await send(ws, {"type": "human_input", "vx": 0.1, "vy": 0.0})
                tick1_a = await next_of_type(ws, "state")
                await send(ws, {"type": "reset", "seed": 99})
                fresh0 = await next_of_type(ws, "state")
                assert fresh0["tick"] == 0
                await send(ws, {"type": "human_input", "vx": 0.1, "vy": 0.0})
                tick1_b = await next_of_type(ws, "state")
                assert tick1_b["u"] != tick1_a["u"]  # planner noise was reseeded

    run(main())


def test_realtime_holds_input_then_goes_stale():
    sc = study_scenario()  # 90 s timeout: nothing ends within the test window

    async def main():
        async with server_uri(sc) as uri:
            async with connect(uri) as ws:
                await start_session(ws, seed=3)
                loop = asyncio.get_running_loop()

                async def collect(duration):
                    frames = []
                    end = loop.time() + duration
                    while True:
                        left = end - loop.time()
                        if left <= 0:
                            return frames
                        try:
                            frames.append(await recv(ws, timeout=left))
                        except asyncio.TimeoutError:
                            return frames

                # with no input the clock still ticks and the human stands still
                quiet = [f for f in await collect(0.35) if f["type"] == "state"]
                assert len(quiet) >= 2
                assert all(f["a"] == [0.0, 0.0] for f in quiet)
                ticks = [f["tick"] for f in quiet]
                assert ticks == sorted(ticks) and ticks[-1] > ticks[0]

                await send(ws, {"type": "human_input", "vx": 0.2, "vy": 0.0})
                after = await collect(0.9)
                states = [f for f in after if f["type"] == "state"]
                moving = [f for f in states if f["a"] != [0.0, 0.0]]
                assert moving, "the input was never applied"
                assert all(f["a"] == [0.2, 0.0] for f in moving)
                # held for roughly 0.3 s at 15 Hz, with scheduling slack
                assert len(moving) <= 10
                tail = [f for f in states if f["tick"] > moving[-1]["tick"]]
                assert tail
                assert all(f["a"] == [0.0, 0.0] for f in tail)
                assert any(f["type"] == "plan" for f in after)

    run(main())


def test_realtime_trial_times_out_and_reports_the_outcome():
    sc = quick_scenario()

    async def main():
        async with server_uri(sc) as uri:
            async with connect(uri) as ws:
                await start_session(ws, seed=2)
                frame = await next_of_type(ws, "outcome", timeout=5.0)
                assert frame["outcome"] == "timeout"
                assert frame["t_final"] == pytest.approx(0.4, abs=1e-9)
                assert frame["final_label"] in ([1], [-1])

    run(main())


def test_pause_and_resume_gate_the_realtime_loop():
    sc = study_scenario()

    async def main():
        async with server_uri(sc) as uri:
            async with connect(uri) as ws:
                await start_session(ws, seed=4)
                await next_of_type(ws, "state")  # at least one live tick
                await send(ws, {"type": "pause"})
                # drain whatever was in flight, then expect silence
                try:
                    while True:
                        await asyncio.wait_for(ws.recv(), 0.3)
                except asyncio.TimeoutError:
                    pass
                with pytest.raises(asyncio.TimeoutError):
                    await asyncio.wait_for(ws.recv(), 0.4)
                await send(ws, {"type": "resume"})
                frame = await next_of_type(ws, "state", timeout=2.0)
                assert frame["tick"] >= 1

    run(main())


def test_concurrent_sessions_are_independent():
    sc = quick_scenario()

    async def main():
        async with server_uri(sc) as uri:
            async with connect(uri) as a, connect(uri) as b:
                a0 = await start_session(a, lockstep=True, start="side-by-side", seed=1)
                b0 = await start_session(b, lockstep=True, start="human-behind", seed=2)
                assert a0 != b0
                await send(a, {"type": "human_input", "vx": 0.1, "vy": 0.0})
                a1 = await next_of_type(a, "state")
                assert a1["tick"] == 1
                # b received no input, so it must not have ticked
                with pytest.raises(asyncio.TimeoutError):
                    await asyncio.wait_for(b.recv(), 0.3)
                off_a = TrialEngine(
                    TrialConfig(
                        scenario=sc, start="side-by-side", algorithm="icmpc", seed=1
                    )
                )
                rec_a, _ = off_a.step_once(Vec2(0.1, 0.0))
                assert payload(a1) == as_wire(rec_a)
                await send(b, {"type": "human_input", "vx": 0.0, "vy": 0.2})
                b1 = await next_of_type(b, "state")
                off_b = TrialEngine(
                    TrialConfig(
                        scenario=sc, start="human-behind", algorithm="icmpc", seed=2
                    )
                )
                rec_b, _ = off_b.step_once(Vec2(0.0, 0.2))
                assert payload(b1) == as_wire(rec_b)

    run(main())
