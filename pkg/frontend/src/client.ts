// WebSocket link with automatic reconnect. Messages are parsed and handed
// to the caller one at a time; sending is refused while the link is down.

import { Command, createLineSplitter, frameCommand, parseServerMessage, ServerMessage } from "./protocol.js";
import { ConnectionStatus } from "./view.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: any) => void) | null;
  onclose: ((ev?: any) => void) | null;
  onerror: ((ev?: any) => void) | null;
  onmessage: ((ev: { data: any }) => void) | null;
  readyState: number;
}

const OPEN = 1;
const RETRY_MS = 1500;

export class TeleopClient {
  private socket: SocketLike | null = null;
  private retryTimer: any = null;
  private closed = false;

  constructor(
    private url: string,
    private onMessage: (msg: ServerMessage) => void,
    private onStatus: (status: ConnectionStatus) => void,
    private makeSocket: (url: string) => SocketLike = (u) => new WebSocket(u) as any,
  ) {}

  connect() {
    this.closed = false;
    this.onStatus("connecting");
    const splitter = createLineSplitter((line) => {
      const msg = parseServerMessage(line);
      if (msg) this.onMessage(msg);
    });
    const ws = this.makeSocket(this.url);
    this.socket = ws;
    ws.onopen = () => this.onStatus("connected");
    ws.onmessage = (ev) => splitter.feed(String(ev.data));
    ws.onerror = () => {};
    ws.onclose = () => {
      this.socket = null;
      this.onStatus("disconnected");
      if (!this.closed) {
        this.retryTimer = setTimeout(() => this.connect(), RETRY_MS);
      }
    };
  }

  /** Send one command frame; returns false when the link is not open. */
  send(cmd: Command): boolean {
    if (!this.socket || this.socket.readyState !== OPEN) return false;
    this.socket.send(frameCommand(cmd));
    return true;
  }

  close() {
    this.closed = true;
    if (this.retryTimer) clearTimeout(this.retryTimer);
    if (this.socket) this.socket.close();
  }
}
