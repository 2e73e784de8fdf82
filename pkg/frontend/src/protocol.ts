// Wire protocol, version "1": single-line JSON frames over a websocket.
// Shapes mirror docs/protocol.md in the repository root; the client treats
// the server as the sole authority on physics and belief state.

export const PROTOCOL_VERSION = "1";

export type Vec2 = [number, number];

/** Object pose on the wire: x, y, heading. */
export type Pose = [number, number, number];

export interface StateFrame {
  type: "state";
  tick: number;
  t: number;
  object: Pose;
  human_end: Vec2;
  robot_end: Vec2;
  a: Vec2;
  u: Vec2;
  posterior: number[];
  entropy: number;
  j_obs: number;
  j_ent: number;
  w: number[];
}

export interface PlanFrame {
  type: "plan";
  t: number;
  path: Vec2[];
  expected_cost: number;
}

export interface OutcomeFrame {
  type: "outcome";
  outcome: string;
  final_label: number[] | null;
  t_final: number;
}

export interface ErrorFrame {
  type: "error";
  code: string;
  text: string;
}

export type ServerFrame = StateFrame | PlanFrame | OutcomeFrame | ErrorFrame;

export interface HelloMessage {
  type: "hello";
  protocol_version: string;
  scenario?: unknown;
  start?: string;
  algorithm?: string;
  seed?: number;
  lockstep?: boolean;
}

export interface HumanInputMessage {
  type: "human_input";
  vx: number;
  vy: number;
}

export interface ResetMessage {
  type: "reset";
  seed?: number;
}

export type ClientMessage =
  | HelloMessage
  | HumanInputMessage
  | ResetMessage
  | { type: "pause" }
  | { type: "resume" };

export class ProtocolError extends Error {}

const FRAME_TYPES = new Set(["state", "plan", "outcome", "error"]);

/** Parse one incoming frame. Throws ProtocolError on anything off-contract. */
export function decodeFrame(line: string): ServerFrame {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch {
    throw new ProtocolError(`frame is not JSON: ${line.slice(0, 80)}`);
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new ProtocolError("frame is not an object");
  }
  const frame = raw as { type?: unknown };
  if (typeof frame.type !== "string" || !FRAME_TYPES.has(frame.type)) {
    throw new ProtocolError(`unknown frame type: ${String(frame.type)}`);
  }
  return raw as ServerFrame;
}

export function encodeMessage(msg: ClientMessage): string {
  return JSON.stringify(msg);
}

export function hello(opts: Omit<HelloMessage, "type" | "protocol_version"> = {}): HelloMessage {
  return { type: "hello", protocol_version: PROTOCOL_VERSION, ...opts };
}

export function humanInput(vx: number, vy: number): HumanInputMessage {
  return { type: "human_input", vx, vy };
}
