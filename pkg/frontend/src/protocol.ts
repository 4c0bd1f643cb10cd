/** Wire types for the feedback service, plus strict-order delivery.
 *
 * Messages are JSON over one WebSocket. The server answers every accepted
 * live frame with exactly one feedback message carrying the same sequence
 * number; a session ends with a summary at the next sequence number.
 */

export type RGB = [number, number, number];

export interface SessionStarted {
  v: number;
  kind: "session_started";
  session_id: string;
  seq: number;
  exercise_id: string;
  template_frames: number;
}

export interface FeedbackMessage {
  v: number;
  kind: "feedback";
  session_id: string;
  seq: number;
  frame_index: number;
  t_values: number[];
  classes: number[];
  colors: RGB[];
  overall: number;
}

export interface SummaryMessage {
  v: number;
  kind: "session_summary";
  session_id: string;
  seq: number;
  mean_t: number[];
  predicted_score: number | null;
  partial: boolean;
  frames: number;
}

export interface ErrorMessage {
  v: number;
  kind: "error";
  session_id: string | null;
  seq: number;
  code: string;
  text: string;
}

export type ServerMessage =
  | SessionStarted
  | FeedbackMessage
  | SummaryMessage
  | ErrorMessage;

export interface FramePayload {
  positions: number[][];
  orientations: number[][];
  frame_index?: number;
  timestamp_ms?: number;
}

export function startSessionMessage(exercise: string, seq: number): string {
  return JSON.stringify({ v: 1, kind: "start_session", seq, exercise_id: exercise });
}

export function liveFrameMessage(frame: FramePayload, seq: number): string {
  return JSON.stringify({ v: 1, kind: "live_frame", seq, frame });
}

export function endSessionMessage(seq: number): string {
  return JSON.stringify({ v: 1, kind: "end_session", seq });
}

export function parseServerMessage(raw: string): ServerMessage {
  const msg = JSON.parse(raw);
  if (typeof msg.kind !== "string") throw new Error("message without kind");
  return msg as ServerMessage;
}

/**
 * Reorders bursty delivery: messages are handed to `deliver` strictly by
 * ascending sequence number. Stale messages (seq already passed) go out
 * immediately rather than stalling the stream.
 */
export class OrderedInbox {
  private expected: number;
  private pending = new Map<number, ServerMessage>();

  constructor(firstSeq: number) {
    this.expected = firstSeq;
  }

  push(msg: ServerMessage, deliver: (m: ServerMessage) => void): void {
    if (typeof msg.seq !== "number" || msg.seq < this.expected) {
      deliver(msg);
      return;
    }
    this.pending.set(msg.seq, msg);
    while (this.pending.has(this.expected)) {
      const next = this.pending.get(this.expected)!;
      this.pending.delete(this.expected);
      this.expected += 1;
      deliver(next);
    }
  }

  /** Sequence number the inbox is waiting for next. */
  get nextExpected(): number {
    return this.expected;
  }

  get buffered(): number {
    return this.pending.size;
  }
}
