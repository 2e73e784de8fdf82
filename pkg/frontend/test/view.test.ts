import { describe, expect, it } from "vitest";

import type { PlanFrame, ServerFrame, StateFrame } from "../src/protocol.js";
import { TRACE_LIMIT, applyFrame, initialView, type ViewState } from "../src/view.js";

function mkState(tick: number, entropy: number): StateFrame {
  return {
    type: "state",
    tick,
    t: tick / 15,
    object: [0, -1.8 + 0.01 * tick, 0],
    human_end: [0.457, -1.8],
    robot_end: [-0.457, -1.8],
    a: [0, 0.1],
    u: [0, 0.1],
    posterior: [0.5, 0.5],
    entropy,
    j_obs: 0,
    j_ent: entropy,
    w: [0],
  };
}

function mkPlan(t: number): PlanFrame {
  return { type: "plan", t, path: [[0, 0], [0, 0.2]], expected_cost: 1.0 };
}

function feed(view: ViewState, frames: ServerFrame[]): ViewState {
  return frames.reduce(applyFrame, view);
}

describe("applyFrame", () => {
  it("starts empty and fills from frames", () => {
    const v0 = initialView();
    expect(v0.state).toBeNull();
    expect(v0.plan).toBeNull();
    expect(v0.entropyTrace).toEqual([]);

    const v1 = feed(v0, [mkState(0, 0.69), mkPlan(0), mkState(1, 0.62)]);
    expect(v1.state?.tick).toBe(1);
    expect(v1.plan?.t).toBe(0);
    expect(v1.entropyTrace).toEqual([0.69, 0.62]);
  });

  it("records outcome and error frames without touching state", () => {
    const v = feed(initialView(), [
      mkState(3, 0.5),
      { type: "outcome", outcome: "success", final_label: [-1], t_final: 8.0 },
      { type: "error", code: "bad-message", text: "nope" },
    ]);
    expect(v.state?.tick).toBe(3);
    expect(v.outcome?.outcome).toBe("success");
    expect(v.lastError?.code).toBe("bad-message");
  });

  it("treats a tick moving backward as a fresh trial", () => {
    const mid = feed(initialView(), [
      mkState(5, 0.5),
      mkPlan(0.33),
      { type: "outcome", outcome: "timeout", final_label: null, t_final: 0.4 },
    ]);
    const fresh = applyFrame(mid, mkState(0, 0.69));
    expect(fresh.plan).toBeNull();
    expect(fresh.outcome).toBeNull();
    expect(fresh.entropyTrace).toEqual([0.69]);
    expect(fresh.state?.tick).toBe(0);
  });

  it("caps the entropy trace", () => {
    let v = initialView();
    const extra = 10;
    for (let k = 0; k < TRACE_LIMIT + extra; k++) {
      v = applyFrame(v, mkState(k, k));
    }
    expect(v.entropyTrace).toHaveLength(TRACE_LIMIT);
    expect(v.entropyTrace[0]).toBe(extra);
    expect(v.entropyTrace[TRACE_LIMIT - 1]).toBe(TRACE_LIMIT + extra - 1);
  });

  it("renders identically when joining mid-trial", () => {
    // No physics lives in the client: a view fed only the tail of the
    // stream agrees with one that saw every frame.
    const stream: ServerFrame[] = [];
    for (let k = 0; k <= 30; k++) {
      stream.push(mkState(k, Math.exp(-0.05 * k)));
      if (k % 5 === 1) {
        stream.push(mkPlan(k / 15));
      }
    }
    const full = feed(initialView(), stream);
    const joinAt = stream.findIndex((f) => f.type === "state" && f.tick === 17);
    const late = feed(initialView(), stream.slice(joinAt));
    expect(late.state).toEqual(full.state);
    expect(late.plan).toEqual(full.plan);
    const tail = full.entropyTrace.slice(full.entropyTrace.length - late.entropyTrace.length);
    expect(late.entropyTrace).toEqual(tail);
  });

  it("does not mutate the previous view", () => {
    const v0 = feed(initialView(), [mkState(0, 0.69)]);
    const frozen = JSON.parse(JSON.stringify(v0));
    applyFrame(v0, mkState(1, 0.6));
    applyFrame(v0, mkPlan(0));
    expect(v0).toEqual(frozen);
  });
});
