"""Command-line interface: simulate, analyze, replay, serve.

Exit codes: 0 done (failed trials are still data), 1 usage or data error,
2 unwritable output location, 3 log integrity mismatch. Verbosity comes
from the COLLAB_LOG_LEVEL environment variable (error|warn|info|debug).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
import time
from typing import Sequence

from .errors import LogIntegrityError, ScenarioError
from .harness import (
    TrialConfig,
    TrialLog,
    compute_metrics,
    derive_seed,
    dump_log,
    load_log,
    run_trial,
    verify_log,
)
from .scenario import (
    ALGORITHMS,
    Scenario,
    load_scenario,
    scenario_to_dict,
    study_scenario,
)

log = logging.getLogger("cotransport.cli")

_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


def _setup_logging() -> None:
    raw = os.environ.get("COLLAB_LOG_LEVEL", "warn").lower()
    level = _LEVELS.get(raw)
    if level is None:
        print(f"warning: unknown COLLAB_LOG_LEVEL {raw!r}, using warn",
              file=sys.stderr)
        level = logging.WARNING
    logging.basicConfig(
        level=level, stream=sys.stderr,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_scenario_arg(path: str | None) -> Scenario:
    if path is None:
        return study_scenario()
    return load_scenario(path)


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args: argparse.Namespace) -> int:
    try:
        scenario = _load_scenario_arg(args.scenario)
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    algos = [a.strip() for a in args.algo.split(",") if a.strip()]
    for a in algos:
        if a not in ALGORITHMS:
            print(f"error: unknown algorithm {a!r} (choices: "
                  f"{', '.join(ALGORITHMS)})", file=sys.stderr)
            return 1
    if args.starts:
        starts = [s.strip() for s in args.starts.split(",") if s.strip()]
        for s in starts:
            if s not in scenario.starts:
                print(f"error: start {s!r} not in scenario starts "
                      f"{scenario.starts}", file=sys.stderr)
                return 1
    else:
        starts = list(scenario.starts)
    if args.trials < 1:
        print("error: --trials must be >= 1", file=sys.stderr)
        return 1

    try:
        os.makedirs(args.out, exist_ok=True)
        probe = os.path.join(args.out, ".write-probe")
        with open(probe, "w"):
            pass
        os.unlink(probe)
    except OSError as e:
        print(f"error: output directory not writable: {e}", file=sys.stderr)
        return 2

    entries = []
    total = len(algos) * len(starts) * args.trials
    done = 0
    for algo in algos:
        for start in starts:
            for trial in range(args.trials):
                seed = derive_seed(args.seed, algo, start, trial)
                cfg = TrialConfig(
                    scenario=scenario, start=start, algorithm=algo, seed=seed
                )
                trial_log = run_trial(cfg)
                fname = f"{algo}_{start}_{trial:04d}.jsonl"
                try:
                    dump_log(trial_log, os.path.join(args.out, fname))
                except OSError as e:
                    print(f"error: cannot write {fname}: {e}", file=sys.stderr)
                    return 2
                entries.append(
                    {
                        "file": fname,
                        "algorithm": algo,
                        "start": start,
                        "trial": trial,
                        "seed": seed,
                        "outcome": trial_log.outcome,
                        "t_final": trial_log.duration(),
                    }
                )
                done += 1
                log.info("trial %d/%d %s %s -> %s",
                         done, total, algo, start, trial_log.outcome)

    manifest = {
        "scenario": scenario_to_dict(scenario),
        "base_seed": args.seed,
        "algorithms": algos,
        "starts": starts,
        "trials_per_cell": args.trials,
        "files": entries,
    }
    try:
        _atomic_write(
            os.path.join(args.out, "manifest.json"),
            json.dumps(manifest, sort_keys=True, indent=2) + "\n",
        )
    except OSError as e:
        print(f"error: cannot write manifest: {e}", file=sys.stderr)
        return 2
    print(f"wrote {len(entries)} trial logs + manifest to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# analyze


def cmd_analyze(args: argparse.Namespace) -> int:
    in_dir = getattr(args, "in")
    if not os.path.isdir(in_dir):
        print(f"error: {in_dir} is not a directory", file=sys.stderr)
        return 1
    files = sorted(
        f for f in os.listdir(in_dir)
        if f.endswith(".jsonl")
    )
    if not files:
        print(f"error: no trial logs found in {in_dir}", file=sys.stderr)
        return 1

    by_algo: dict[str, list[TrialLog]] = {}
    skipped = 0
    for fname in files:
        try:
            lg = load_log(os.path.join(in_dir, fname))
        except LogIntegrityError as e:
            log.warning("skipping %s: %s", fname, e)
            skipped += 1
            continue
        by_algo.setdefault(lg.config.algorithm, []).append(lg)
    if not by_algo:
        print("error: every log file was unreadable", file=sys.stderr)
        return 1

    out_dir = args.out or in_dir
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as e:
        print(f"error: output directory not writable: {e}", file=sys.stderr)
        return 2

    for algo in sorted(by_algo):
        report = compute_metrics(by_algo[algo])
        try:
            _atomic_write(
                os.path.join(out_dir, f"metrics_{algo}.json"),
                json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n",
            )
            rows = ["bin,t_norm,entropy_nats"]
            for i, h in enumerate(report.entropy_trace):
                rows.append(f"{i},{i / (len(report.entropy_trace) - 1):.4f},{h!r}")
            _atomic_write(
                os.path.join(out_dir, f"entropy_trace_{algo}.csv"),
                "\n".join(rows) + "\n",
            )
        except OSError as e:
            print(f"error: cannot write metrics: {e}", file=sys.stderr)
            return 2
        print(f"=== {algo} ===")
        print(report.table())
        print()
    if skipped:
        print(f"skipped {skipped} unreadable log file(s)", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# replay


def cmd_replay(args: argparse.Namespace) -> int:
    if args.speed <= 0.0:
        print("error: --speed must be positive", file=sys.stderr)
        return 1
    try:
        trial_log = load_log(args.log)
    except LogIntegrityError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    try:
        verify_log(trial_log)
    except LogIntegrityError as e:
        print(f"integrity check failed: {e}", file=sys.stderr)
        return 3
    print(f"integrity ok: {len(trial_log.records)} records, "
          f"outcome {trial_log.outcome}")

    if args.serve:
        from . import session  # local import keeps plain replay light
        import asyncio

        async def stream() -> None:
            from websockets.asyncio.server import serve as ws_serve

            async def handler(ws):
                try:
                    raw = await ws.recv()
                    hello = json.loads(raw)
                    if str(hello.get("protocol_version")) != session.PROTOCOL_VERSION:
                        await ws.send(json.dumps({
                            "type": "error", "code": "protocol-version",
                            "text": "protocol mismatch"}))
                        return
                    dt = trial_log.config.scenario.model.dt / args.speed
                    for tick, rec in enumerate(trial_log.records):
                        frame = {"type": "state", "tick": tick}
                        frame.update(rec.to_dict())
                        await ws.send(json.dumps(frame, sort_keys=True))
                        await asyncio.sleep(dt)
                    label = trial_log.final_label
                    await ws.send(json.dumps({
                        "type": "outcome", "outcome": trial_log.outcome,
                        "final_label": list(label.signs) if label else None,
                        "t_final": trial_log.duration()}, sort_keys=True))
                except Exception:  # client went away; replay is best-effort
                    pass

            server = await ws_serve(handler, "127.0.0.1", args.port)
            print(f"replaying on ws://127.0.0.1:{args.port} (ctrl-c to stop)")
            await server.serve_forever()

        try:
            asyncio.run(stream())
        except KeyboardInterrupt:
            pass
        return 0

    dt = trial_log.config.scenario.model.dt / args.speed
    for rec in trial_log.records:
        post = " ".join(f"{p:.3f}" for p in rec.posterior)
        print(f"t={rec.t:7.3f}  mid=({rec.object[0]:+.3f},{rec.object[1]:+.3f})  "
              f"H={rec.entropy:.4f}  posterior=[{post}]")
        if dt > 1e-4:
            time.sleep(min(dt, 0.25))
    print(f"outcome: {trial_log.outcome}  final_label: {trial_log.final_label}")
    return 0


# ---------------------------------------------------------------------------
# serve


def cmd_serve(args: argparse.Namespace) -> int:
    from . import session

    try:
        scenario = _load_scenario_arg(args.scenario)
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(f"session server on ws://{args.host}:{args.port} (ctrl-c to stop)")
    session.run_server(args.port, scenario, args.host)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cotransport",
        description="Collaborative-transport simulation and analysis tools.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run seeded trial batches")
    sim.add_argument("--scenario", help="scenario JSON (default: built-in study)")
    sim.add_argument("--algo", default="icmpc,vanilla",
                     help="comma-separated algorithms (icmpc, vanilla)")
    sim.add_argument("--trials", type=int, default=1,
                     help="trials per algorithm x start cell")
    sim.add_argument("--seed", type=int, default=0, help="base seed")
    sim.add_argument("--starts", help="comma-separated start subset")
    sim.add_argument("--out", required=True, help="output directory")
    sim.set_defaults(func=cmd_simulate)

    ana = sub.add_parser("analyze", help="aggregate metrics from trial logs")
    ana.add_argument("--in", dest="in", required=True, help="log directory")
    ana.add_argument("--out", help="metrics output directory (default: --in)")
    ana.set_defaults(func=cmd_analyze)

    rep = sub.add_parser("replay", help="verify and print a trial log")
    rep.add_argument("--log", required=True, help="trial log file")
    rep.add_argument("--speed", type=float, default=1000.0,
                     help="playback speed multiplier")
    rep.add_argument("--serve", action="store_true",
                     help="stream the replay over the session protocol")
    rep.add_argument("--port", type=int, default=8741)
    rep.set_defaults(func=cmd_replay)

    srv = sub.add_parser("serve", help="run the interactive session server")
    srv.add_argument("--port", type=int, default=8741)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--scenario", help="scenario JSON (default: built-in study)")
    srv.set_defaults(func=cmd_serve)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
