// Client-side view model. Pure: frames go in, a new ViewState comes out.
// The client keeps no physics of its own, so joining (or rejoining) a
// session mid-trial renders correctly from the very next state frame.

import type { ErrorFrame, OutcomeFrame, PlanFrame, ServerFrame, StateFrame } from "./protocol.js";

export type ConnectionStatus = "connecting" | "connected" | "closed";
export type InputMode = "pointer-follow" | "keyboard";

/** Entropy history kept for the sparkline: 30 s at 15 Hz. */
export const TRACE_LIMIT = 450;

export interface ViewState {
  status: ConnectionStatus;
  state: StateFrame | null;
  plan: PlanFrame | null;
  outcome: OutcomeFrame | null;
  lastError: ErrorFrame | null;
  entropyTrace: number[];
  mode: InputMode;
}

export function initialView(mode: InputMode = "pointer-follow"): ViewState {
  return {
    status: "connecting",
    state: null,
    plan: null,
    outcome: null,
    lastError: null,
    entropyTrace: [],
    mode,
  };
}

export function applyFrame(view: ViewState, frame: ServerFrame): ViewState {
  switch (frame.type) {
    case "state": {
      // A tick that moves backward means a fresh trial (reset); drop the
      // previous trial's plan, outcome, and telemetry history.
      const restarted = view.state !== null && frame.tick < view.state.tick;
      const trace = restarted ? [] : view.entropyTrace.slice();
      trace.push(frame.entropy);
      if (trace.length > TRACE_LIMIT) {
        trace.splice(0, trace.length - TRACE_LIMIT);
      }
      return {
        ...view,
        state: frame,
        plan: restarted ? null : view.plan,
        outcome: restarted ? null : view.outcome,
        entropyTrace: trace,
      };
    }
    case "plan":
      return { ...view, plan: frame };
    case "outcome":
      return { ...view, outcome: frame };
    case "error":
      return { ...view, lastError: frame };
  }
}

export function setStatus(view: ViewState, status: ConnectionStatus): ViewState {
  return { ...view, status };
}

export function setMode(view: ViewState, mode: InputMode): ViewState {
  return { ...view, mode };
}
