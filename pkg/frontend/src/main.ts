/** Browser wiring: template pane + live pane, session flow, replay pump.
 *
 * URL parameters:
 *   service  ws endpoint, default ws://127.0.0.1:8777/session
 *   replay   URL of a .rec file to stream as the live performance
 *   exercise preselected exercise id
 */

import { SessionClient } from "./client.js";
import { initialState, reduce, scoreLabel, type ViewState } from "./machine.js";
import type { FramePayload, RGB, ServerMessage } from "./protocol.js";
import { renderSkeleton, type Viewport } from "./renderer.js";
import { parseRec, ReplaySource } from "./replay.js";

interface TemplateMeta {
  exercise_id: string;
  name: string;
  frame_count: number;
}

function wsToHttp(ws: string): string {
  return ws.replace(/^ws/, "http").replace(/\/session$/, "");
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const serviceUrl = params.get("service") ?? "ws://127.0.0.1:8777/session";
  const httpBase = wsToHttp(serviceUrl);

  const exerciseSelect = el<HTMLSelectElement>("exercise");
  const startButton = el<HTMLButtonElement>("start");
  const stopButton = el<HTMLButtonElement>("stop");
  const banner = el<HTMLDivElement>("banner");
  const toast = el<HTMLDivElement>("toast");
  const phaseLabel = el<HTMLSpanElement>("phase");
  const scoreBox = el<HTMLDivElement>("score");
  const templateCanvas = el<HTMLCanvasElement>("template-view");
  const liveCanvas = el<HTMLCanvasElement>("live-view");

  const templates = new Map<string, { positions: number[][] }[]>();
  let state: ViewState = initialState();
  let client: SessionClient | null = null;
  let replay: ReplaySource | null = null;
  let replayFrames: FramePayload[] = [];
  let lastLiveFrame: FramePayload | null = null;
  let lastColors: RGB[] | null = null;
  let templateCursor = 0;

  function apply(event: Parameters<typeof reduce>[1]): void {
    state = reduce(state, event);
    syncDom();
  }

  function syncDom(): void {
    phaseLabel.textContent = state.phase;
    banner.textContent = state.banner ?? "";
    banner.style.display = state.banner ? "block" : "none";
    toast.textContent = state.toast ?? "";
    toast.style.display = state.toast ? "block" : "none";
    startButton.disabled = state.phase === "running" || state.phase === "connecting";
    stopButton.disabled = state.phase !== "running";
    scoreBox.textContent = state.phase === "summary" ? scoreLabel(state.summary) : "";
    draw();
  }

  function draw(): void {
    const view: Viewport = { width: liveCanvas.width, height: liveCanvas.height };
    const tctx = templateCanvas.getContext("2d");
    const lctx = liveCanvas.getContext("2d");
    if (!tctx || !lctx) return;
    tctx.clearRect(0, 0, view.width, view.height);
    lctx.clearRect(0, 0, view.width, view.height);

    const frames = state.exercise ? templates.get(state.exercise) : undefined;
    if (frames && frames.length > 0) {
      renderSkeleton(tctx, view, frames[templateCursor % frames.length].positions, null);
    }
    // a missing live frame holds the previous drawing (colors included)
    if (lastLiveFrame) {
      renderSkeleton(lctx, view, lastLiveFrame.positions, lastColors);
    }
  }

  function onServerMessage(msg: ServerMessage): void {
    if (msg.kind === "session_started") {
      apply({ type: "session_started", sessionId: msg.session_id,
              templateFrames: msg.template_frames });
      startReplay();
    } else if (msg.kind === "feedback") {
      lastColors = msg.colors;
      templateCursor = msg.frame_index;
      apply({ type: "feedback", message: msg });
    } else if (msg.kind === "session_summary") {
      apply({ type: "summary", message: msg });
      client?.close();
    } else {
      apply({ type: "server_error", code: msg.code, text: msg.text });
    }
  }

  function startReplay(): void {
    if (replayFrames.length === 0) return;
    replay = new ReplaySource(replayFrames, 30);
    replay.start(
      (frame) => {
        lastLiveFrame = frame;
        client?.sendFrame(frame);
      },
      () => client?.end(),
    );
  }

  function connect(): void {
    apply({ type: "connect" });
    if (!state.exercise || state.phase !== "connecting") return;
    const socket = new WebSocket(serviceUrl);
    client = new SessionClient(socket, {
      onMessage: onServerMessage,
      onClose: () => {
        replay?.stop();
        if (state.phase === "running" || state.phase === "connecting") {
          apply({ type: "connection_lost" });
          setTimeout(connect, 2000); // retry
        }
      },
    });
    socket.onopen = () => client?.start(state.exercise!);
  }

  startButton.addEventListener("click", connect);
  stopButton.addEventListener("click", () => {
    replay?.stop();
    client?.end();
  });
  exerciseSelect.addEventListener("change", () => {
    apply({ type: "select_exercise", exercise: exerciseSelect.value });
    templateCursor = 0;
    void loadTemplateFrames(exerciseSelect.value);
  });

  async function loadTemplateFrames(exercise: string): Promise<void> {
    if (templates.has(exercise)) return;
    const detail = await fetch(`${httpBase}/templates/${exercise}`).then((r) => r.json());
    templates.set(exercise, detail.frames ?? []);
    draw();
  }

  // populate the exercise list from the service
  try {
    const index: TemplateMeta[] = await fetch(`${httpBase}/templates`).then((r) => r.json());
    for (const meta of index) {
      const option = document.createElement("option");
      option.value = meta.exercise_id;
      option.textContent = `${meta.exercise_id}: ${meta.name}`;
      exerciseSelect.appendChild(option);
    }
    const preset = params.get("exercise") ?? index[0]?.exercise_id;
    if (preset) {
      exerciseSelect.value = preset;
      apply({ type: "select_exercise", exercise: preset });
      await loadTemplateFrames(preset);
    }
  } catch {
    apply({ type: "connection_lost" });
  }

  const replayUrl = params.get("replay");
  if (replayUrl) {
    const text = await fetch(replayUrl).then((r) => r.text());
    replayFrames = parseRec(text).frames;
  }

  syncDom();
}

void boot();
