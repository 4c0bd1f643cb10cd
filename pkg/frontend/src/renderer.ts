/** 2-D skeleton rendering: front-view orthographic projection onto a canvas.
 *
 * Joint colors come verbatim from the service's feedback messages; this
 * module never re-derives grading, it only paints what it was told.
 */

import { BONES, NUM_JOINTS } from "./topology.js";
import type { RGB } from "./protocol.js";

/** The subset of CanvasRenderingContext2D the renderer needs (test-fakeable). */
export interface Draw2D {
  fillStyle: string;
  strokeStyle: string;
  lineWidth: number;
  beginPath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  fill(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  clearRect(x: number, y: number, w: number, h: number): void;
}

export interface Viewport {
  width: number;
  height: number;
}

export function cssColor([r, g, b]: RGB): string {
  return `rgb(${r},${g},${b})`;
}

/**
 * Orthographic front view: x maps across the canvas, y (up) maps down the
 * canvas, z is dropped. The body is fit using fixed world bounds so the
 * figure does not jitter as it moves.
 */
export function projectFrontal(
  positions: number[][],
  view: Viewport,
): Array<[number, number]> {
  const worldXHalf = 1.0; // meters left/right of the spine base
  const worldYMin = -0.1;
  const worldYMax = 2.0;
  const scale = Math.min(
    view.width / (2 * worldXHalf),
    view.height / (worldYMax - worldYMin),
  );
  return positions.map(([x, y]) => [
    view.width / 2 + x * scale,
    view.height - (y - worldYMin) * scale,
  ]);
}

export const BONE_COLOR = "rgb(148,163,184)";
export const DEFAULT_JOINT_COLOR = "rgb(226,232,240)";

/**
 * Draw one skeleton. `colors` must hold 25 RGB triples (one per joint) or be
 * null for the uncolored template figure.
 */
export function renderSkeleton(
  ctx: Draw2D,
  view: Viewport,
  positions: number[][],
  colors: RGB[] | null,
  jointRadius = 5,
): void {
  if (positions.length !== NUM_JOINTS) {
    throw new Error(`expected ${NUM_JOINTS} joints, got ${positions.length}`);
  }
  if (colors !== null && colors.length !== NUM_JOINTS) {
    throw new Error(`expected ${NUM_JOINTS} colors, got ${colors.length}`);
  }
  const points = projectFrontal(positions, view);

  ctx.strokeStyle = BONE_COLOR;
  ctx.lineWidth = 2;
  for (const [a, b] of BONES) {
    ctx.beginPath();
    ctx.moveTo(points[a][0], points[a][1]);
    ctx.lineTo(points[b][0], points[b][1]);
    ctx.stroke();
  }

  for (let j = 0; j < NUM_JOINTS; j++) {
    ctx.fillStyle = colors ? cssColor(colors[j]) : DEFAULT_JOINT_COLOR;
    ctx.beginPath();
    ctx.arc(points[j][0], points[j][1], jointRadius, 0, 2 * Math.PI);
    ctx.fill();
  }
}
