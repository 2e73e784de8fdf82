// Playground entry point: connect to the session service, pump pointer or
// keyboard input at 15 Hz, and render whatever the server says is true.

import { decodeFrame, encodeMessage, hello, humanInput, type ClientMessage, type Vec2 } from "./protocol.js";
import { applyFrame, initialView, setMode, setStatus, type InputMode, type ViewState } from "./view.js";
import { cameraFor, drawScene, drawTelemetry, fromScreen, type SceneConfig } from "./render.js";
import { isDirectionKey, keyboardVelocity, pointerVelocity } from "./input.js";

// Mirrors scenarios/study.json; sent inline in hello so the rendered
// geometry always matches what the server simulates, whatever scenario
// the service itself was launched with.
const DEFAULT_SCENARIO = {
  name: "study",
  context: {
    bounds: [-1.4, -2.8, 1.4, 2.8],
    goal: { heading: 1.5707963267948966, position: [0.0, 1.8] },
    goal_radius: 0.46,
    obstacles: [{ center: [0.0, 0.0], half_extent: 0.075 }],
    stick_length: 0.914,
  },
  controller: {
    delta: 0.5,
    gamma: 0.95,
    heading_weight: 0.0,
    horizon_steps: 15,
    lam: 0.1,
    noise_sigma: 0.15,
    rollout_dt: 0.25,
    samples: 100,
    seed: 0,
    speed_cap: 0.3,
    w_ent: 1.0,
    w_obs: 1.0,
  },
  human: { kind: "committed", noise_sigma: 0.0, seed: 0, speed: 0.5, target: [-1] },
  inference: {
    approach_angle: 1.0471975511965976,
    passed_threshold: 0.25,
    rationality: 1.0,
    stationary_speed: 0.0001,
  },
  model: { dt: 0.06666666666666667, human_speed_cap: 1.0, robot_speed_cap: 0.3 },
  starts: ["side-by-side", "human-behind", "human-in-front"],
  timeout: 90.0,
};

const INPUT_PERIOD_MS = 1000 / 15;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function main(): void {
  const sceneCanvas = el<HTMLCanvasElement>("scene");
  const teleCanvas = el<HTMLCanvasElement>("telemetry");
  const statusLine = el<HTMLElement>("status");
  const startSelect = el<HTMLSelectElement>("start");
  const algoSelect = el<HTMLSelectElement>("algorithm");
  const modeButton = el<HTMLButtonElement>("mode-btn");
  const pauseButton = el<HTMLButtonElement>("pause-btn");
  const replayButton = el<HTMLButtonElement>("replay-btn");
  const newButton = el<HTMLButtonElement>("new-btn");

  const sceneCtx = sceneCanvas.getContext("2d")!;
  const teleCtx = teleCanvas.getContext("2d")!;

  const scene: SceneConfig = {
    bounds: DEFAULT_SCENARIO.context.bounds as [number, number, number, number],
    obstacles: DEFAULT_SCENARIO.context.obstacles.map((ob) => ({
      center: ob.center as Vec2,
      half_extent: ob.half_extent,
    })),
    goal: DEFAULT_SCENARIO.context.goal.position as Vec2,
    goalHeading: DEFAULT_SCENARIO.context.goal.heading,
    goalRadius: DEFAULT_SCENARIO.context.goal_radius,
  };
  const humanCap = DEFAULT_SCENARIO.model.human_speed_cap;
  const camera = cameraFor(scene.bounds, sceneCanvas.width, sceneCanvas.height);

  let view: ViewState = initialView();
  let ws: WebSocket | null = null;
  let paused = false;
  let pointerWorld: Vec2 | null = null;
  const heldKeys = new Set<string>();

  const wsUrl =
    new URLSearchParams(location.search).get("ws") ?? "ws://127.0.0.1:8741";

  function send(msg: ClientMessage): void {
    if (ws && ws.readyState === WebSocket.OPEN) {
      ws.send(encodeMessage(msg));
    }
  }

  function connect(): void {
    if (ws) {
      ws.onclose = null;
      ws.close();
    }
    view = initialView(view.mode);
    paused = false;
    const socket = new WebSocket(wsUrl);
    ws = socket;
    socket.onopen = () => {
      view = setStatus(view, "connected");
      socket.send(
        encodeMessage(
          hello({
            scenario: DEFAULT_SCENARIO,
            start: startSelect.value,
            algorithm: algoSelect.value,
            seed: Math.floor(Math.random() * 2 ** 31),
          }),
        ),
      );
    };
    socket.onmessage = (event: MessageEvent) => {
      try {
        view = applyFrame(view, decodeFrame(String(event.data)));
      } catch (e) {
        console.warn("dropped frame:", e);
      }
    };
    socket.onclose = () => {
      if (ws === socket) {
        view = setStatus(view, "closed");
      }
    };
    socket.onerror = (event: Event) => {
      console.warn("socket error", event);
    };
  }

  // Changing the start pose or the controller needs a fresh hello, which
  // means a fresh session.
  startSelect.addEventListener("change", connect);
  algoSelect.addEventListener("change", connect);

  function toggleMode(): void {
    const mode: InputMode = view.mode === "pointer-follow" ? "keyboard" : "pointer-follow";
    view = setMode(view, mode);
    modeButton.textContent = `input: ${mode} (M)`;
  }

  function togglePause(): void {
    paused = !paused;
    send({ type: paused ? "pause" : "resume" });
    pauseButton.textContent = paused ? "resume (space)" : "pause (space)";
  }

  modeButton.addEventListener("click", toggleMode);
  pauseButton.addEventListener("click", togglePause);
  replayButton.addEventListener("click", () => send({ type: "reset" }));
  newButton.addEventListener("click", () =>
    send({ type: "reset", seed: Math.floor(Math.random() * 2 ** 31) }),
  );

  sceneCanvas.addEventListener("pointermove", (e: PointerEvent) => {
    const rect = sceneCanvas.getBoundingClientRect();
    pointerWorld = fromScreen(camera, [e.clientX - rect.left, e.clientY - rect.top]);
  });
  sceneCanvas.addEventListener("pointerleave", () => {
    pointerWorld = null;
  });

  window.addEventListener("keydown", (e: KeyboardEvent) => {
    if (isDirectionKey(e.code)) {
      heldKeys.add(e.code);
      e.preventDefault();
    } else if (e.code === "KeyM") {
      toggleMode();
    } else if (e.code === "Space") {
      togglePause();
      e.preventDefault();
    } else if (e.code === "KeyR") {
      send({ type: "reset" });
    } else if (e.code === "KeyN") {
      send({ type: "reset", seed: Math.floor(Math.random() * 2 ** 31) });
    }
  });
  window.addEventListener("keyup", (e: KeyboardEvent) => {
    heldKeys.delete(e.code);
  });

  // Velocity commands go out at the simulation rate whether or not the
  // user moved; the server holds the last command and zeroes stale ones.
  setInterval(() => {
    if (!view.state || !ws || ws.readyState !== WebSocket.OPEN) {
      return;
    }
    let v: Vec2 = [0, 0];
    if (view.mode === "pointer-follow" && pointerWorld) {
      v = pointerVelocity(pointerWorld, view.state.human_end, humanCap);
    } else if (view.mode === "keyboard") {
      v = keyboardVelocity(heldKeys, humanCap);
    }
    send(humanInput(v[0], v[1]));
  }, INPUT_PERIOD_MS);

  function describe(): string {
    const parts = [`${view.status}`];
    if (view.state) {
      parts.push(`tick ${view.state.tick}`, `t = ${view.state.t.toFixed(2)} s`);
    }
    if (view.outcome) {
      parts.push(`outcome: ${view.outcome.outcome}`);
    }
    if (view.lastError) {
      parts.push(`last error: ${view.lastError.code}`);
    }
    return parts.join("  |  ");
  }

  function frame(): void {
    drawScene(sceneCtx, view, scene, sceneCanvas.width, sceneCanvas.height);
    drawTelemetry(teleCtx, view, teleCanvas.width, teleCanvas.height);
    statusLine.textContent = describe();
    requestAnimationFrame(frame);
  }

  connect();
  requestAnimationFrame(frame);
}

window.addEventListener("load", main);
