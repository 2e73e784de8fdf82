// Pointer and keyboard input, converted into human velocity commands.
// The server clamps again on receipt; clamping here keeps what the user
// sees consistent with what the simulation will actually do.

import type { Vec2 } from "./protocol.js";

/** Pointer-follow proportional gain, 1/s: v = gain * (pointer - human_end). */
export const POINTER_GAIN = 2.0;

/** Keyboard commands move at half the cap, a comfortable walking pace. */
export const KEYBOARD_SPEED_FRACTION = 0.5;

export function clampToCap(v: Vec2, cap: number): Vec2 {
  const norm = Math.hypot(v[0], v[1]);
  if (norm <= cap || norm === 0) {
    return v;
  }
  const s = cap / norm;
  return [v[0] * s, v[1] * s];
}

/**
 * Velocity command that steers the human end toward the pointer.
 * Both points are in world coordinates, meters.
 */
export function pointerVelocity(pointer: Vec2, humanEnd: Vec2, cap: number): Vec2 {
  const v: Vec2 = [
    POINTER_GAIN * (pointer[0] - humanEnd[0]),
    POINTER_GAIN * (pointer[1] - humanEnd[1]),
  ];
  return clampToCap(v, cap);
}

const KEY_DIRECTIONS: Record<string, Vec2> = {
  ArrowUp: [0, 1],
  ArrowDown: [0, -1],
  ArrowLeft: [-1, 0],
  ArrowRight: [1, 0],
  KeyW: [0, 1],
  KeyS: [0, -1],
  KeyA: [-1, 0],
  KeyD: [1, 0],
};

export function isDirectionKey(code: string): boolean {
  return code in KEY_DIRECTIONS;
}

/**
 * Fixed-speed velocity from the set of held key codes (arrows or WASD),
 * in world coordinates with +y up. Opposing keys cancel; diagonals are
 * normalized so they are no faster than a straight move.
 */
export function keyboardVelocity(held: ReadonlySet<string>, cap: number): Vec2 {
  let dx = 0;
  let dy = 0;
  for (const code of held) {
    const dir = KEY_DIRECTIONS[code];
    if (dir) {
      dx += dir[0];
      dy += dir[1];
    }
  }
  const norm = Math.hypot(dx, dy);
  if (norm === 0) {
    return [0, 0];
  }
  const speed = KEYBOARD_SPEED_FRACTION * cap;
  return [(dx / norm) * speed, (dy / norm) * speed];
}
