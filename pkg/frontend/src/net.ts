// Socket plumbing: connect, parse inbound frames, retry on close. The page
// reads host and port from the URL query so one build serves any session.

import {
  parseServerMessage,
  serializeClientMessage,
  type ClientMessage,
  type ServerMessage,
} from "./protocol.js";

export const RETRY_MS = 2000;

export function wsUrlFromQuery(search: string, fallbackHost: string): string {
  const qs = new URLSearchParams(search);
  const host = qs.get("host") ?? (fallbackHost || "localhost");
  const port = qs.get("port") ?? "8711";
  return `ws://${host}:${port}`;
}

export interface TeleopCallbacks {
  onMessage(msg: ServerMessage): void;
  onStatus(connected: boolean): void;
}

export class Teleop {
  private ws: WebSocket | null = null;
  private stopped = false;

  constructor(
    private readonly url: string,
    private readonly cb: TeleopCallbacks,
  ) {}

  start(): void {
    this.stopped = false;
    this.open();
  }

  stop(): void {
    this.stopped = true;
    this.ws?.close();
    this.ws = null;
  }

  // True only if the frame actually left; callers treat false as "socket
  // down", which suppresses input.
  send(msg: ClientMessage): boolean {
    if (this.ws === null || this.ws.readyState !== WebSocket.OPEN) return false;
    this.ws.send(serializeClientMessage(msg));
    return true;
  }

  private open(): void {
    const ws = new WebSocket(this.url);
    this.ws = ws;
    ws.onopen = () => this.cb.onStatus(true);
    ws.onmessage = (ev) => {
      try {
        this.cb.onMessage(parseServerMessage(String(ev.data)));
      } catch (err) {
        console.warn("dropped unparseable frame:", err);
      }
    };
    ws.onerror = () => {
      ws.close();
    };
    ws.onclose = () => {
      this.cb.onStatus(false);
      if (this.ws === ws) this.ws = null;
      if (!this.stopped) setTimeout(() => this.open(), RETRY_MS);
    };
  }
}
