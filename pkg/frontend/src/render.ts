// Top-down workspace view plus belief telemetry.
//
// Geometry is computed by pure functions and then executed against a
// minimal 2D-context interface, so tests can replay server frames through
// a recording context and pin the exact draw commands.

import type { Vec2 } from "./protocol.js";
import { TRACE_LIMIT, type ViewState } from "./view.js";

export interface SceneConfig {
  bounds: [number, number, number, number];
  obstacles: { center: Vec2; half_extent: number }[];
  goal: Vec2;
  goalHeading: number;
  goalRadius: number;
}

export interface Rect {
  x: number;
  y: number;
  w: number;
  h: number;
}

/** Subset of CanvasRenderingContext2D the renderer touches. */
export interface Canvas2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  textAlign: CanvasTextAlign;
  globalAlpha: number;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  closePath(): void;
  stroke(): void;
  fill(): void;
  fillText(text: string, x: number, y: number): void;
  setLineDash(segments: number[]): void;
}

export const COLORS = {
  background: "#f6f4ef",
  bounds: "#8a8578",
  obstacle: "#b2452f",
  goalFill: "rgba(68, 140, 94, 0.25)",
  goalEdge: "#448c5e",
  stick: "#4a4a4a",
  object: "#222222",
  human: "#d97a1f",
  robot: "#2f6fb2",
  plan: "#2f6fb2",
  barLeft: "#7b5ea7",
  barRight: "#3a8f7a",
  spark: "#555555",
  text: "#333333",
  faint: "#9a958a",
} as const;

// Telemetry boxes are shared with the golden test. Widths and heights are
// powers of two so value-to-pixel scaling is exact in floating point.
export const POSTERIOR_BOX: Rect = { x: 12, y: 24, w: 256, h: 22 };
export const SPARK_BOX: Rect = { x: 12, y: 96, w: 256, h: 64 };

// --- camera ---------------------------------------------------------------

export interface Camera {
  scale: number;
  ox: number;
  oy: number;
}

/** Fit the workspace bounds into a canvas, y up, centered, with a margin. */
export function cameraFor(
  bounds: [number, number, number, number],
  width: number,
  height: number,
  margin = 24,
): Camera {
  const [x0, y0, x1, y1] = bounds;
  const scale = Math.min((width - 2 * margin) / (x1 - x0), (height - 2 * margin) / (y1 - y0));
  const cx = (x0 + x1) / 2;
  const cy = (y0 + y1) / 2;
  return { scale, ox: width / 2 - scale * cx, oy: height / 2 + scale * cy };
}

export function toScreen(cam: Camera, p: Vec2): Vec2 {
  return [cam.ox + cam.scale * p[0], cam.oy - cam.scale * p[1]];
}

export function fromScreen(cam: Camera, s: Vec2): Vec2 {
  return [(s[0] - cam.ox) / cam.scale, (cam.oy - s[1]) / cam.scale];
}

// --- telemetry geometry ----------------------------------------------------

export interface PosteriorBarGeom {
  pLeft: number;
  pRight: number;
  left: Rect;
  right: Rect;
}

/**
 * Split a horizontal bar by the posterior mass on each strategy. The
 * rectangle widths are the frame's probabilities scaled by the box width,
 * nothing rounded or smoothed.
 */
export function posteriorBar(posterior: number[], box: Rect): PosteriorBarGeom {
  const pLeft = posterior[0] ?? 0;
  const pRight = posterior[1] ?? 0;
  const leftW = pLeft * box.w;
  return {
    pLeft,
    pRight,
    left: { x: box.x, y: box.y, w: leftW, h: box.h },
    right: { x: box.x + leftW, y: box.y, w: pRight * box.w, h: box.h },
  };
}

export interface SparklineGeom {
  /** The entropies drawn, oldest first: exactly the server's values. */
  values: number[];
  points: Vec2[];
  baseline: number;
  ceiling: number;
}

/**
 * Entropy history as a polyline anchored at the right edge, scrolling
 * left as frames arrive. Zero entropy sits on the baseline; maxValue
 * (ln 2 for two strategies) sits at the top of the box.
 */
export function entropySparkline(
  trace: number[],
  box: Rect,
  span: number,
  maxValue: number = Math.LN2,
): SparklineGeom {
  const step = box.w / (span - 1);
  const n = trace.length;
  const points: Vec2[] = [];
  for (let i = 0; i < n; i++) {
    const x = box.x + box.w - (n - 1 - i) * step;
    const frac = Math.min(Math.max(trace[i] / maxValue, 0), 1);
    points.push([x, box.y + box.h * (1 - frac)]);
  }
  return {
    values: trace.slice(),
    points,
    baseline: box.y + box.h,
    ceiling: box.y,
  };
}

// --- drawing ---------------------------------------------------------------

function polyline(ctx: Canvas2D, pts: Vec2[]): void {
  ctx.beginPath();
  ctx.moveTo(pts[0][0], pts[0][1]);
  for (let i = 1; i < pts.length; i++) {
    ctx.lineTo(pts[i][0], pts[i][1]);
  }
  ctx.stroke();
}

function disk(ctx: Canvas2D, center: Vec2, r: number, fill: string): void {
  ctx.fillStyle = fill;
  ctx.beginPath();
  ctx.arc(center[0], center[1], r, 0, 2 * Math.PI);
  ctx.fill();
}

function overlay(ctx: Canvas2D, width: number, height: number, wash: string, line1: string, line2: string): void {
  ctx.fillStyle = wash;
  ctx.fillRect(0, 0, width, height);
  ctx.fillStyle = COLORS.text;
  ctx.textAlign = "center";
  ctx.font = "16px system-ui, sans-serif";
  ctx.fillText(line1, width / 2, height / 2 - 6);
  ctx.font = "13px system-ui, sans-serif";
  ctx.fillText(line2, width / 2, height / 2 + 16);
  ctx.textAlign = "left";
}

function outcomeWash(outcome: string): string {
  if (outcome === "collision") {
    return "rgba(190, 40, 40, 0.30)";
  }
  if (outcome === "success") {
    return "rgba(60, 150, 90, 0.25)";
  }
  return "rgba(180, 140, 40, 0.25)";
}

export function drawScene(
  ctx: Canvas2D,
  view: ViewState,
  scene: SceneConfig,
  width: number,
  height: number,
): void {
  const cam = cameraFor(scene.bounds, width, height);
  const [x0, y0, x1, y1] = scene.bounds;
  const tl = toScreen(cam, [x0, y1]);
  const br = toScreen(cam, [x1, y0]);

  ctx.setLineDash([]);
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, width, height);
  ctx.strokeStyle = COLORS.bounds;
  ctx.lineWidth = 2;
  ctx.strokeRect(tl[0], tl[1], br[0] - tl[0], br[1] - tl[1]);

  // Goal disk with a heading tick showing the required final orientation.
  const g = toScreen(cam, scene.goal);
  const gr = scene.goalRadius * cam.scale;
  ctx.fillStyle = COLORS.goalFill;
  ctx.beginPath();
  ctx.arc(g[0], g[1], gr, 0, 2 * Math.PI);
  ctx.fill();
  ctx.strokeStyle = COLORS.goalEdge;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  ctx.arc(g[0], g[1], gr, 0, 2 * Math.PI);
  ctx.stroke();
  polyline(ctx, [
    g,
    [g[0] + gr * Math.cos(scene.goalHeading), g[1] - gr * Math.sin(scene.goalHeading)],
  ]);

  ctx.fillStyle = COLORS.obstacle;
  for (const ob of scene.obstacles) {
    const c = toScreen(cam, ob.center);
    const e = ob.half_extent * cam.scale;
    ctx.fillRect(c[0] - e, c[1] - e, 2 * e, 2 * e);
  }

  // Planned object path, when the controller has published one.
  if (view.plan && view.plan.path.length > 1) {
    ctx.strokeStyle = COLORS.plan;
    ctx.lineWidth = 1.5;
    ctx.setLineDash([6, 4]);
    polyline(ctx, view.plan.path.map((p) => toScreen(cam, p)));
    ctx.setLineDash([]);
  }

  if (view.state) {
    const h = toScreen(cam, view.state.human_end);
    const r = toScreen(cam, view.state.robot_end);
    ctx.strokeStyle = COLORS.stick;
    ctx.lineWidth = 3;
    polyline(ctx, [h, r]);
    disk(ctx, toScreen(cam, [view.state.object[0], view.state.object[1]]), 4, COLORS.object);
    disk(ctx, h, 7, COLORS.human);
    disk(ctx, r, 7, COLORS.robot);
  }

  if (view.outcome) {
    overlay(
      ctx,
      width,
      height,
      outcomeWash(view.outcome.outcome),
      `${view.outcome.outcome} at t = ${view.outcome.t_final.toFixed(2)} s`,
      "press R to reset",
    );
  }
  if (view.status !== "connected") {
    overlay(
      ctx,
      width,
      height,
      "rgba(240, 240, 240, 0.75)",
      view.status === "connecting" ? "connecting" : "disconnected",
      view.status === "connecting" ? "waiting for the session service" : "reload the page to reconnect",
    );
  }
}

export function drawTelemetry(ctx: Canvas2D, view: ViewState, width: number, height: number): void {
  ctx.setLineDash([]);
  ctx.textAlign = "left";
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, width, height);
  ctx.font = "12px system-ui, sans-serif";

  ctx.fillStyle = COLORS.text;
  ctx.fillText("strategy posterior", POSTERIOR_BOX.x, POSTERIOR_BOX.y - 8);

  if (view.state) {
    const bar = posteriorBar(view.state.posterior, POSTERIOR_BOX);
    ctx.fillStyle = COLORS.barLeft;
    ctx.fillRect(bar.left.x, bar.left.y, bar.left.w, bar.left.h);
    ctx.fillStyle = COLORS.barRight;
    ctx.fillRect(bar.right.x, bar.right.y, bar.right.w, bar.right.h);
    ctx.strokeStyle = COLORS.faint;
    ctx.lineWidth = 1;
    ctx.strokeRect(POSTERIOR_BOX.x, POSTERIOR_BOX.y, POSTERIOR_BOX.w, POSTERIOR_BOX.h);
    ctx.fillStyle = COLORS.text;
    ctx.fillText(
      `LEFT ${bar.pLeft.toFixed(3)}`,
      POSTERIOR_BOX.x,
      POSTERIOR_BOX.y + POSTERIOR_BOX.h + 14,
    );
    ctx.textAlign = "right";
    ctx.fillText(
      `RIGHT ${bar.pRight.toFixed(3)}`,
      POSTERIOR_BOX.x + POSTERIOR_BOX.w,
      POSTERIOR_BOX.y + POSTERIOR_BOX.h + 14,
    );
    ctx.textAlign = "left";
  }

  ctx.fillStyle = COLORS.text;
  ctx.fillText("entropy (nats)", SPARK_BOX.x, SPARK_BOX.y - 8);
  ctx.strokeStyle = COLORS.faint;
  ctx.lineWidth = 1;
  ctx.strokeRect(SPARK_BOX.x, SPARK_BOX.y, SPARK_BOX.w, SPARK_BOX.h);

  if (view.entropyTrace.length > 0) {
    const spark = entropySparkline(view.entropyTrace, SPARK_BOX, TRACE_LIMIT);
    ctx.strokeStyle = COLORS.spark;
    ctx.lineWidth = 1.5;
    if (spark.points.length === 1) {
      disk(ctx, spark.points[0], 1.5, COLORS.spark);
    } else {
      polyline(ctx, spark.points);
    }
    const latest = view.entropyTrace[view.entropyTrace.length - 1];
    ctx.fillStyle = COLORS.text;
    ctx.fillText(
      latest.toFixed(4),
      SPARK_BOX.x,
      SPARK_BOX.y + SPARK_BOX.h + 14,
    );
  }
}
