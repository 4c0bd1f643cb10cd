/** .rec file replay: substitutes for a live camera so the whole loop runs
 * without hardware. Line 1 is a JSON header, every further line one frame of
 * 175 comma-separated values (75 positions then 100 orientations).
 */

import type { FramePayload } from "./protocol.js";
import { NUM_JOINTS } from "./topology.js";

export interface RecFile {
  subject: string;
  exercise: string;
  cohort: string;
  score: number | null;
  frames: FramePayload[];
}

const FRAME_WIDTH = NUM_JOINTS * 3 + NUM_JOINTS * 4;

export function parseRec(text: string): RecFile {
  const lines = text.split("\n").filter((line) => line.trim().length > 0);
  if (lines.length < 3) throw new Error("rec file needs a header and 2+ frames");
  const header = JSON.parse(lines[0]);
  const frames: FramePayload[] = [];
  for (let i = 1; i < lines.length; i++) {
    const values = lines[i].split(",").map(Number);
    if (values.length !== FRAME_WIDTH) {
      throw new Error(`line ${i + 1}: expected ${FRAME_WIDTH} values, got ${values.length}`);
    }
    if (values.some((v) => !Number.isFinite(v))) {
      throw new Error(`line ${i + 1}: non-finite value`);
    }
    const positions: number[][] = [];
    const orientations: number[][] = [];
    for (let j = 0; j < NUM_JOINTS; j++) {
      positions.push(values.slice(j * 3, j * 3 + 3));
    }
    const base = NUM_JOINTS * 3;
    for (let j = 0; j < NUM_JOINTS; j++) {
      orientations.push(values.slice(base + j * 4, base + j * 4 + 4));
    }
    frames.push({ positions, orientations, frame_index: i - 1 });
  }
  return {
    subject: String(header.subject ?? ""),
    exercise: String(header.exercise ?? ""),
    cohort: String(header.cohort ?? ""),
    score: header.score ?? null,
    frames,
  };
}

/** Pumps frames at a fixed rate; the camera adapter would look identical. */
export class ReplaySource {
  private timer: ReturnType<typeof setInterval> | null = null;
  private cursor = 0;

  constructor(
    private frames: FramePayload[],
    private fps = 30,
  ) {}

  start(onFrame: (frame: FramePayload) => void, onDone: () => void): void {
    this.stop();
    this.cursor = 0;
    this.timer = setInterval(() => {
      if (this.cursor >= this.frames.length) {
        this.stop();
        onDone();
        return;
      }
      onFrame(this.frames[this.cursor]);
      this.cursor += 1;
    }, 1000 / this.fps);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
