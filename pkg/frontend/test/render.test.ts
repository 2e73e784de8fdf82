import { describe, expect, it } from "vitest";

import type { StateFrame } from "../src/protocol.js";
import {
  COLORS,
  POSTERIOR_BOX,
  SPARK_BOX,
  cameraFor,
  drawScene,
  drawTelemetry,
  entropySparkline,
  fromScreen,
  posteriorBar,
  toScreen,
  type SceneConfig,
} from "../src/render.js";
import { applyFrame, initialView, setStatus, type ViewState } from "../src/view.js";
import { RecordingContext } from "./recorder.js";

const SCENE: SceneConfig = {
  bounds: [-1.4, -2.8, 1.4, 2.8],
  obstacles: [{ center: [0, 0], half_extent: 0.075 }],
  goal: [0, 1.8],
  goalHeading: Math.PI / 2,
  goalRadius: 0.46,
};

function mkState(posterior: [number, number], entropy: number): StateFrame {
  return {
    type: "state",
    tick: 1,
    t: 1 / 15,
    object: [0, -1.7, 0],
    human_end: [0.457, -1.7],
    robot_end: [-0.457, -1.7],
    a: [0, 0.2],
    u: [0, 0.2],
    posterior,
    entropy,
    j_obs: 0,
    j_ent: entropy,
    w: [0.01],
  };
}

function connectedView(posterior: [number, number], entropy: number): ViewState {
  return applyFrame(setStatus(initialView(), "connected"), mkState(posterior, entropy));
}

describe("camera", () => {
  it("round-trips world and screen coordinates", () => {
    const cam = cameraFor(SCENE.bounds, 440, 800);
    for (const p of [[0, 0], [-1.4, -2.8], [1.3, 2.7], [0.2, -1.8]] as const) {
      const back = fromScreen(cam, toScreen(cam, [p[0], p[1]]));
      expect(back[0]).toBeCloseTo(p[0], 12);
      expect(back[1]).toBeCloseTo(p[1], 12);
    }
  });

  it("flips y so up is up", () => {
    const cam = cameraFor(SCENE.bounds, 440, 800);
    const low = toScreen(cam, [0, -2]);
    const high = toScreen(cam, [0, 2]);
    expect(high[1]).toBeLessThan(low[1]);
  });
});

describe("posterior bar geometry", () => {
  it("fills the whole bar for a certain LEFT", () => {
    const bar = posteriorBar([1, 0], POSTERIOR_BOX);
    expect(bar.left.w).toBe(POSTERIOR_BOX.w);
    expect(bar.right.w).toBe(0);
  });

  it("recovers the probabilities exactly from the widths", () => {
    // Box width is a power of two, so scaling is lossless both ways.
    let x = 0.123456789;
    for (let i = 0; i < 1000; i++) {
      x = (x * 9301 + 49297) % 1;
      const bar = posteriorBar([x, 1 - x], POSTERIOR_BOX);
      expect(Object.is(bar.left.w / POSTERIOR_BOX.w, x)).toBe(true);
      expect(Object.is(bar.right.w / POSTERIOR_BOX.w, 1 - x)).toBe(true);
    }
  });
});

describe("entropy sparkline geometry", () => {
  it("puts zero entropy on the baseline and ln 2 at the ceiling", () => {
    const geom = entropySparkline([0, Math.LN2], SPARK_BOX, 450);
    expect(geom.points[0][1]).toBe(geom.baseline);
    expect(geom.points[1][1]).toBe(geom.ceiling);
  });

  it("carries the drawn values verbatim", () => {
    const trace = [0.69, 0.5, 0.31, 0.1];
    expect(entropySparkline(trace, SPARK_BOX, 450).values).toEqual(trace);
  });

  it("anchors the newest sample at the right edge", () => {
    const geom = entropySparkline([0.5, 0.4, 0.3], SPARK_BOX, 450);
    const last = geom.points[geom.points.length - 1];
    expect(last[0]).toBe(SPARK_BOX.x + SPARK_BOX.w);
  });
});

describe("drawScene contract", () => {
  it("hides the planned path when no plan frame has arrived", () => {
    const ctx = new RecordingContext();
    drawScene(ctx, connectedView([0.5, 0.5], Math.LN2), SCENE, 440, 800);
    expect(ctx.named("setLineDash").some(([, segs]) => (segs as number[]).length > 0)).toBe(false);
  });

  it("draws the planned path dashed when a plan is present", () => {
    const view = applyFrame(connectedView([0.5, 0.5], Math.LN2), {
      type: "plan",
      t: 1 / 15,
      path: [[0, -1.7], [0, -1.6], [0, -1.5]],
      expected_cost: 2.0,
    });
    const ctx = new RecordingContext();
    drawScene(ctx, view, SCENE, 440, 800);
    expect(ctx.named("setLineDash").some(([, segs]) => (segs as number[]).length > 0)).toBe(true);
  });

  it("flashes red with a reset prompt on a collision outcome", () => {
    const view = applyFrame(connectedView([0.9, 0.1], 0.3), {
      type: "outcome",
      outcome: "collision",
      final_label: null,
      t_final: 3.2,
    });
    const ctx = new RecordingContext();
    drawScene(ctx, view, SCENE, 440, 800);
    expect(ctx.named("fillStyle").some(([, v]) => v === "rgba(190, 40, 40, 0.30)")).toBe(true);
    const texts = ctx.named("fillText").map(([, text]) => text as string);
    expect(texts.some((t) => t.includes("collision"))).toBe(true);
    expect(texts.some((t) => t.includes("press R to reset"))).toBe(true);
  });

  it("greys the canvas and shows a banner when disconnected", () => {
    const view = setStatus(connectedView([0.5, 0.5], Math.LN2), "closed");
    const ctx = new RecordingContext();
    drawScene(ctx, view, SCENE, 440, 800);
    const texts = ctx.named("fillText").map(([, text]) => text as string);
    expect(texts).toContain("disconnected");
    expect(ctx.named("fillStyle").some(([, v]) => v === "rgba(240, 240, 240, 0.75)")).toBe(true);
  });

  it("keeps the canvas clean while connected and running", () => {
    const ctx = new RecordingContext();
    drawScene(ctx, connectedView([0.5, 0.5], Math.LN2), SCENE, 440, 800);
    expect(ctx.named("fillText")).toHaveLength(0);
  });
});

describe("drawTelemetry contract", () => {
  it("renders a full LEFT bar and a floor-level sparkline for a settled belief", () => {
    const ctx = new RecordingContext();
    drawTelemetry(ctx, connectedView([1, 0], 0), 280, 190);

    const rects = ctx.named("fillRect");
    const leftBar = rects.find(
      (c) => c[1] === POSTERIOR_BOX.x && c[2] === POSTERIOR_BOX.y && c[4] === POSTERIOR_BOX.h,
    );
    expect(leftBar?.[3]).toBe(POSTERIOR_BOX.w);
    const texts = ctx.named("fillText").map(([, text]) => text as string);
    expect(texts).toContain("LEFT 1.000");
    expect(texts).toContain("RIGHT 0.000");
    expect(texts).toContain("0.0000");
  });

  it("labels the panes even before the first state frame", () => {
    const ctx = new RecordingContext();
    drawTelemetry(ctx, initialView(), 280, 190);
    const texts = ctx.named("fillText").map(([, text]) => text as string);
    expect(texts).toContain("strategy posterior");
    expect(texts).toContain("entropy (nats)");
  });
});

describe("colors", () => {
  it("keeps the human and robot ends distinguishable", () => {
    expect(COLORS.human).not.toBe(COLORS.robot);
  });
});
