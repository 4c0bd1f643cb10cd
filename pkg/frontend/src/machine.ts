/** Session state machine: pure reducer over view state.
 *
 * idle -> connecting -> running -> summary, with reconnect dropping back to
 * idle. Grading and scoring stay on the server; this state only mirrors the
 * latest messages for display.
 */

import type { FeedbackMessage, RGB, SummaryMessage } from "./protocol.js";

export type Phase = "idle" | "connecting" | "running" | "summary";

const COLOR_HISTORY_LIMIT = 120;

export interface ViewState {
  phase: Phase;
  exercise: string | null;
  connected: boolean;
  sessionId: string | null;
  templateFrames: number;
  feedback: FeedbackMessage | null;
  colorHistory: RGB[][];
  summary: SummaryMessage | null;
  banner: string | null; // connection problems
  toast: string | null; // per-message errors, stream continues
}

export type Event =
  | { type: "select_exercise"; exercise: string }
  | { type: "connect" }
  | { type: "session_started"; sessionId: string; templateFrames: number }
  | { type: "feedback"; message: FeedbackMessage }
  | { type: "summary"; message: SummaryMessage }
  | { type: "server_error"; code: string; text: string }
  | { type: "connection_lost" }
  | { type: "reset" };

export function initialState(): ViewState {
  return {
    phase: "idle",
    exercise: null,
    connected: false,
    sessionId: null,
    templateFrames: 0,
    feedback: null,
    colorHistory: [],
    summary: null,
    banner: null,
    toast: null,
  };
}

export function reduce(state: ViewState, event: Event): ViewState {
  switch (event.type) {
    case "select_exercise":
      if (state.phase === "running") return state; // finish the session first
      return { ...state, exercise: event.exercise };
    case "connect":
      if (!state.exercise) return { ...state, toast: "select an exercise first" };
      return { ...state, phase: "connecting", banner: null, summary: null,
               feedback: null, colorHistory: [] };
    case "session_started":
      return {
        ...state,
        phase: "running",
        connected: true,
        sessionId: event.sessionId,
        templateFrames: event.templateFrames,
        toast: null,
      };
    case "feedback": {
      if (state.phase !== "running") return state;
      const history = [...state.colorHistory, event.message.colors];
      if (history.length > COLOR_HISTORY_LIMIT) history.shift();
      return { ...state, feedback: event.message, colorHistory: history };
    }
    case "summary":
      return { ...state, phase: "summary", summary: event.message };
    case "server_error":
      // errors like BAD_FRAME are per-message: show and keep streaming
      return { ...state, toast: `${event.code}: ${event.text}` };
    case "connection_lost":
      if (state.phase === "idle") return state;
      return {
        ...state,
        phase: "idle",
        connected: false,
        sessionId: null,
        banner: "connection lost, retrying",
      };
    case "reset":
      return { ...initialState(), exercise: state.exercise };
    default:
      return state;
  }
}

/** Clinical-scale score text for the summary screen (service sends 0-50). */
export function scoreLabel(summary: SummaryMessage | null): string {
  if (!summary) return "";
  if (summary.predicted_score === null) return "score unavailable";
  const flag = summary.partial ? " (partial performance)" : "";
  return `${summary.predicted_score.toFixed(1)} / 50${flag}`;
}
