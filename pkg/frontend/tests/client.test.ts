import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import { SocketLike, TeleopClient } from "../src/client.js";
import { ServerMessage } from "../src/protocol.js";

class FakeSocket implements SocketLike {
  sent: string[] = [];
  readyState = 0;
  onopen: ((ev?: any) => void) | null = null;
  onclose: ((ev?: any) => void) | null = null;
  onerror: ((ev?: any) => void) | null = null;
  onmessage: ((ev: { data: any }) => void) | null = null;

  send(data: string) {
    this.sent.push(data);
  }
  close() {
    this.readyState = 3;
    this.onclose?.();
  }
  open() {
    this.readyState = 1;
    this.onopen?.();
  }
  push(data: string) {
    this.onmessage?.({ data });
  }
}

function harness() {
  const sockets: FakeSocket[] = [];
  const messages: ServerMessage[] = [];
  const statuses: string[] = [];
  const client = new TeleopClient(
    "ws://test/ws",
    (m) => messages.push(m),
    (s) => statuses.push(s),
    () => {
      const s = new FakeSocket();
      sockets.push(s);
      return s;
    },
  );
  return { client, sockets, messages, statuses };
}

beforeEach(() => {
  vi.useFakeTimers();
  vi.spyOn(console, "warn").mockImplementation(() => {});
});
afterEach(() => {
  vi.useRealTimers();
  vi.restoreAllMocks();
});

describe("TeleopClient", () => {
  it("parses framed messages and reports status changes", () => {
    const { client, sockets, messages, statuses } = harness();
    client.connect();
    sockets[0].open();
    sockets[0].push('{"type":"error","message":"a"}\n{"type":"ack","command":"pause","effective_t":0}\n');
    expect(messages.map((m) => m.type)).toEqual(["error", "ack"]);
    expect(statuses).toEqual(["connecting", "connected"]);
  });

  it("refuses to send while the link is down", () => {
    const { client, sockets } = harness();
    expect(client.send({ type: "pause" })).toBe(false);
    client.connect();
    expect(client.send({ type: "pause" })).toBe(false);
    sockets[0].open();
    expect(client.send({ type: "pause" })).toBe(true);
    expect(sockets[0].sent).toEqual(['{"type":"pause"}\n']);
  });

  it("reconnects after an unexpected close", () => {
    const { client, sockets, statuses } = harness();
    client.connect();
    sockets[0].open();
    sockets[0].close();
    expect(statuses.at(-1)).toBe("disconnected");
    vi.advanceTimersByTime(2000);
    expect(sockets.length).toBe(2);
    sockets[1].open();
    expect(statuses.at(-1)).toBe("connected");
  });

  it("stays closed after an explicit close", () => {
    const { client, sockets } = harness();
    client.connect();
    sockets[0].open();
    client.close();
    vi.advanceTimersByTime(5000);
    expect(sockets.length).toBe(1);
  });
});
