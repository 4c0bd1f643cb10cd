/** WebSocket session client: outbound sequence bookkeeping plus strictly
 * ordered inbound delivery (bursts may arrive out of order; rendering must
 * not).
 */

import {
  endSessionMessage,
  liveFrameMessage,
  OrderedInbox,
  parseServerMessage,
  startSessionMessage,
  type FramePayload,
  type ServerMessage,
} from "./protocol.js";

/** Minimal socket surface so tests can inject a fake. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: (() => void) | null;
  onerror: ((ev: unknown) => void) | null;
  onopen: (() => void) | null;
}

export interface SessionCallbacks {
  onMessage: (msg: ServerMessage) => void;
  onClose: () => void;
}

export class SessionClient {
  private seq = 0;
  private inbox: OrderedInbox;

  constructor(
    private socket: SocketLike,
    private callbacks: SessionCallbacks,
  ) {
    this.inbox = new OrderedInbox(0);
    socket.onmessage = (ev) => {
      const msg = parseServerMessage(ev.data);
      this.inbox.push(msg, callbacks.onMessage);
    };
    socket.onclose = () => callbacks.onClose();
    socket.onerror = () => callbacks.onClose();
  }

  start(exercise: string): void {
    this.socket.send(startSessionMessage(exercise, this.seq));
    this.seq += 1;
  }

  sendFrame(frame: FramePayload): number {
    const seq = this.seq;
    this.socket.send(liveFrameMessage(frame, seq));
    this.seq += 1;
    return seq;
  }

  end(): void {
    this.socket.send(endSessionMessage(this.seq));
    this.seq += 1;
  }

  close(): void {
    this.socket.close();
  }
}
