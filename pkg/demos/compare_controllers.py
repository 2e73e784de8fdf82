"""Head-to-head: entropy-aware planning vs. plain goal seeking.

Runs a small seeded sweep of both controllers against committed and stubborn
simulated humans, round-robin over the three standard starts. The headline
numbers of the full study show up already at this size: both controllers
reach the goal, but the entropy-aware one resolves the human's strategy
noticeably earlier (lower posterior entropy at mid-trial).

Takes about half a minute on a laptop. Raise TRIALS for tighter estimates.
"""

from cotransport.harness import TrialConfig, compute_metrics, derive_seed, run_trial
from cotransport.scenario import STANDARD_STARTS, study_scenario

TRIALS = 9  # per (human kind, controller) cell

for kind in ("committed", "stubborn"):
    scenario = study_scenario(kind)
    print(f"### {kind} human")
    traces = {}
    for algo in ("icmpc", "vanilla"):
        logs = []
        for i in range(TRIALS):
            start = STANDARD_STARTS[i % len(STANDARD_STARTS)]
            seed = derive_seed(0, algo, start, i)
            logs.append(run_trial(TrialConfig(
                scenario=scenario, start=start, algorithm=algo, seed=seed)))
        report = compute_metrics(logs)
        traces[algo] = report.entropy_trace
        print(f"--- {algo}")
        print(report.table())
        print()

    # The entropy trace is averaged over trials on a normalized time axis;
    # the gap in the middle of the trial is the legibility payoff.
    gap = traces["vanilla"][50] - traces["icmpc"][50]
    print(f"mid-trial entropy gap (vanilla - icmpc): {gap:+.3f} nats")
    print()
