"""Real-time trial service: newline-delimited JSON over websockets.

Each connection drives one trial at a time through the same TrialEngine the
offline harness uses; the client plays the human by streaming velocity
commands. Frames are single-line JSON objects tagged with a "type" field.

Client -> server:
  hello       {type, protocol_version: "1", scenario?: object, algorithm?,
               start?, seed?: int, lockstep?: bool}
  human_input {type, vx: m/s, vy: m/s}
  reset       {type, seed?: int}
  pause       {type}
  resume      {type}

Server -> client:
  state   {type, tick, ...tick record fields as in the trial log}
  plan    {type, t, path: [[x, y], ...], expected_cost}
  outcome {type, outcome, final_label, t_final}
  error   {type, code, text}

Timing contract (real-time mode): the simulation ticks at 15 Hz regardless
of client pace; state frames are emitted every tick and plan frames every
fifth tick; the latest human_input is held for up to 300 ms, after which
the human velocity is treated as zero. A congested client gets the newest
state/plan frames, never a backlog. lockstep mode instead advances exactly
one tick per human_input received, which makes an online session
bit-reproducible against an offline trial.
"""

from __future__ import annotations

import asyncio
import json
import logging
from collections import deque
from dataclasses import replace
from typing import Any

from websockets.asyncio.server import serve as ws_serve
from websockets.exceptions import ConnectionClosed

from .harness import TrialConfig, TrialEngine
from .scenario import Scenario, scenario_from_dict, study_scenario
from .errors import ScenarioError
from .workspace import ZERO, Vec2

PROTOCOL_VERSION = "1"

#: Input older than this (seconds) is treated as "human stopped".
STALE_INPUT_S = 0.3

#: Plan frames every N ticks: 15 Hz / 5 = 3 Hz.
PLAN_EVERY = 5

log = logging.getLogger("cotransport.session")


def _frame(obj: dict[str, Any]) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


class _Session:
    """Per-connection state: one engine, mailboxes, and pacing."""

    def __init__(self, ws, default_scenario: Scenario):
        self.ws = ws
        self.default_scenario = default_scenario
        self.lockstep = False
        self.engine: TrialEngine | None = None
        self.base_cfg: TrialConfig | None = None
        self.latest_input: tuple[Vec2, float] | None = None
        self.input_q: asyncio.Queue = asyncio.Queue()
        self.running = asyncio.Event()
        self.running.set()
        self.reset_request: int | None = None
        self.reset_event = asyncio.Event()
        self.reliable: deque[str] = deque()
        self.mailbox: dict[str, str] = {}
        self.wake = asyncio.Event()
        self.closed = asyncio.Event()

    # -- outgoing ----------------------------------------------------------

    def push_reliable(self, obj: dict[str, Any]) -> None:
        self.reliable.append(_frame(obj))
        self.wake.set()

    def push_latest(self, kind: str, obj: dict[str, Any]) -> None:
        self.mailbox[kind] = _frame(obj)
        self.wake.set()

    async def sender(self) -> None:
        try:
            while True:
                await self.wake.wait()
                self.wake.clear()
                while self.reliable:
                    await self.ws.send(self.reliable.popleft())
                for kind in ("state", "plan"):
                    line = self.mailbox.pop(kind, None)
                    if line is not None:
                        await self.ws.send(line)
        except ConnectionClosed:
            self.closed.set()

    def push_state(self, record, tick: int) -> None:
        frame = {"type": "state", "tick": tick}
        frame.update(record.to_dict())
        if self.lockstep:
            self.push_reliable(frame)  # paced by the client; nothing to drop
        else:
            self.push_latest("state", frame)

    def push_plan(self, plan, t: float) -> None:
        frame = {
            "type": "plan",
            "t": t,
            "path": [[p.x, p.y] for p in plan.path],
            "expected_cost": plan.expected_cost,
        }
        if self.lockstep:
            self.push_reliable(frame)
        else:
            self.push_latest("plan", frame)

    # -- incoming ----------------------------------------------------------

    async def receiver(self) -> None:
        try:
            await self._receive_loop()
        finally:
            self.closed.set()

    async def _receive_loop(self) -> None:
        async for raw in self.ws:
            try:
                msg = json.loads(raw)
                kind = msg["type"]
            except (json.JSONDecodeError, KeyError, TypeError):
                self.push_reliable(
                    {"type": "error", "code": "bad-json",
                     "text": "messages must be JSON objects with a type field"}
                )
                continue
            if kind == "human_input":
                try:
                    v = Vec2(float(msg["vx"]), float(msg["vy"]))
                except (KeyError, TypeError, ValueError) as e:
                    self.push_reliable(
                        {"type": "error", "code": "bad-message",
                         "text": f"bad human_input: {e}"}
                    )
                    continue
                if self.lockstep:
                    self.input_q.put_nowait(v)
                else:
                    self.latest_input = (v, asyncio.get_running_loop().time())
            elif kind == "reset":
                seed = msg.get("seed")
                try:
                    seed = int(seed) if seed is not None else self.base_cfg.seed
                except (TypeError, ValueError) as e:
                    self.push_reliable(
                        {"type": "error", "code": "bad-message",
                         "text": f"bad reset: {e}"}
                    )
                    continue
                self.reset_request = seed
                self.reset_event.set()
                if self.lockstep:
                    self.input_q.put_nowait(None)  # unblock the tick wait
            elif kind == "pause":
                self.running.clear()
            elif kind == "resume":
                self.running.set()
            elif kind == "hello":
                self.push_reliable(
                    {"type": "error", "code": "bad-message",
                     "text": "session already started"}
                )
            else:
                self.push_reliable(
                    {"type": "error", "code": "bad-message",
                     "text": f"unknown message type {kind!r}"}
                )

    def current_input(self) -> Vec2:
        if self.latest_input is None:
            return ZERO
        v, stamp = self.latest_input
        if asyncio.get_running_loop().time() - stamp > STALE_INPUT_S:
            return ZERO
        return v

    # -- trial loop --------------------------------------------------------

    async def run_trial(self) -> None:
        engine = self.engine
        assert engine is not None
        self.push_state(engine.records[0], tick=0)
        if self.lockstep:
            await self._run_lockstep(engine)
        else:
            await self._run_realtime(engine)
        if engine.outcome is not None:
            label = engine.final_label()
            self.push_reliable(
                {
                    "type": "outcome",
                    "outcome": engine.outcome,
                    "final_label": list(label.signs) if label else None,
                    "t_final": engine.state.time,
                }
            )

    def _live(self, engine: TrialEngine) -> bool:
        return (
            engine.outcome is None
            and not self.reset_event.is_set()
            and not self.closed.is_set()
        )

    async def _run_realtime(self, engine: TrialEngine) -> None:
        loop = asyncio.get_running_loop()
        dt = engine.model.dt
        next_t = loop.time() + dt
        while self._live(engine):
            if not self.running.is_set():
                await asyncio.sleep(0.05)  # paused; poll for resume/close
                next_t = loop.time() + dt
                continue
            delay = next_t - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
            record, plan = engine.step_once(self.current_input())
            self.push_state(record, engine.tick)
            if engine.tick % PLAN_EVERY == 1 or engine.outcome is not None:
                self.push_plan(plan, engine.state.time)
            next_t += dt
            if loop.time() > next_t + 1.0:
                next_t = loop.time() + dt  # fell far behind; re-anchor
            await asyncio.sleep(0)  # let receiver/sender run even when late

    async def _run_lockstep(self, engine: TrialEngine) -> None:
        while self._live(engine):
            try:
                v = await asyncio.wait_for(self.input_q.get(), timeout=0.1)
            except asyncio.TimeoutError:
                continue  # re-check outcome / reset / close
            if v is None:  # reset sentinel
                break
            record, plan = engine.step_once(v)
            self.push_state(record, engine.tick)
            if engine.tick % PLAN_EVERY == 1 or engine.outcome is not None:
                self.push_plan(plan, engine.state.time)


def _config_from_hello(msg: dict[str, Any], default: Scenario) -> TrialConfig:
    raw_scenario = msg.get("scenario")
    scenario = scenario_from_dict(raw_scenario) if raw_scenario else default
    start = str(msg.get("start", scenario.starts[0]))
    algorithm = str(msg.get("algorithm", "icmpc"))
    seed = int(msg.get("seed", 0))
    return TrialConfig(scenario=scenario, start=start, algorithm=algorithm, seed=seed)


async def _handle(ws, default_scenario: Scenario) -> None:
    session = _Session(ws, default_scenario)
    try:
        raw = await ws.recv()
    except ConnectionClosed:
        return
    try:
        hello = json.loads(raw)
        if not isinstance(hello, dict) or hello.get("type") != "hello":
            raise ScenarioError("first message must be hello")
        if str(hello.get("protocol_version")) != PROTOCOL_VERSION:
            await ws.send(_frame({
                "type": "error", "code": "protocol-version",
                "text": f"server speaks protocol {PROTOCOL_VERSION}",
            }))
            await ws.close()
            return
        session.lockstep = bool(hello.get("lockstep", False))
        session.base_cfg = _config_from_hello(hello, default_scenario)
        session.engine = TrialEngine(session.base_cfg, plan_details=True)
    except (json.JSONDecodeError, ScenarioError, ValueError, TypeError) as e:
        try:
            await ws.send(_frame({
                "type": "error", "code": "bad-hello", "text": str(e),
            }))
            await ws.close()
        except ConnectionClosed:
            pass
        return

    sender = asyncio.create_task(session.sender())
    receiver = asyncio.create_task(session.receiver())
    try:
        while not session.closed.is_set():
            await session.run_trial()
            # Idle until the client asks for a fresh trial (or goes away).
            while not (session.reset_event.is_set() or session.closed.is_set()):
                await asyncio.sleep(0.05)
            if session.closed.is_set():
                break
            session.reset_event.clear()
            seed = session.reset_request
            session.reset_request = None
            session.latest_input = None
            while not session.input_q.empty():
                session.input_q.get_nowait()
            cfg = replace(session.base_cfg, seed=seed)
            session.base_cfg = cfg
            session.engine = TrialEngine(cfg, plan_details=True)
    except ConnectionClosed:
        pass
    finally:
        sender.cancel()
        receiver.cancel()


async def serve(port: int, scenario: Scenario | None = None,
                host: str = "127.0.0.1"):
    """Start the session server; returns the websockets Server object.

    Callers own the lifetime: use `async with` or close() the result. Pass
    port 0 to bind an ephemeral port (find it via server.sockets).
    """
    scenario = scenario or study_scenario()

    async def handler(ws):
        await _handle(ws, scenario)

    return await ws_serve(handler, host, port)


def run_server(port: int, scenario: Scenario | None = None,
               host: str = "127.0.0.1") -> None:
    """Blocking entry point used by the command line."""

    async def main() -> None:
        server = await serve(port, scenario, host)
        addr = ", ".join(str(s.getsockname()) for s in server.sockets)
        log.info("session server listening on %s", addr)
        await server.serve_forever()

    try:
        asyncio.run(main())
    except KeyboardInterrupt:
        pass
