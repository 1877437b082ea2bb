// Wire types for the teleop WebSocket link. The server speaks
// newline-delimited JSON: one object per line in both directions.

export interface Pose {
  x: number;
  y: number;
  yaw: number;
}

export interface HelloMessage {
  type: "hello";
  agent_kind: string;
  delay_ms: number;
  dt: number;
  telemetry_every: number;
  perimeter: { center: [number, number]; half_extent: number };
  boundary: [number, number];
  strict_clock: boolean;
}

export interface StateMessage {
  type: "state";
  tick: number;
  t: number;
  pose: Pose;
  joints: number[];
  goals: [number, number][];
  current_index: number;
  waypoints_reached: number;
  done: boolean;
}

export interface AckMessage {
  type: "ack";
  command: string;
  effective_t: number;
}

export interface ErrorMessage {
  type: "error";
  message: string;
}

export type ServerMessage = HelloMessage | StateMessage | AckMessage | ErrorMessage;

export interface SetWaypointsCommand {
  type: "set_waypoints";
  waypoints: [number, number][];
}

export interface BareCommand {
  type: "reset" | "pause" | "resume";
}

export type Command = SetWaypointsCommand | BareCommand;

/** Encode a command as one newline-terminated frame. */
export function frameCommand(cmd: Command): string {
  return JSON.stringify(cmd) + "\n";
}

/**
 * Incremental splitter for newline-delimited streams. Partial lines are
 * buffered until the terminating newline arrives.
 */
export function createLineSplitter(onLine: (line: string) => void) {
  let buffer = "";
  return {
    feed(chunk: string) {
      buffer += chunk;
      const lines = buffer.split("\n");
      buffer = lines.pop()!;
      for (const line of lines) {
        if (line.trim().length > 0) onLine(line);
      }
    },
  };
}

function isPair(v: any): v is [number, number] {
  return Array.isArray(v) && v.length === 2 && v.every((n) => typeof n === "number");
}

/**
 * Parse one line from the server. Returns null (and warns) for anything
 * that is not a well-formed message; a flaky line must not kill the UI.
 */
export function parseServerMessage(line: string): ServerMessage | null {
  let raw: any;
  try {
    raw = JSON.parse(line);
  } catch {
    console.warn("teleop: dropping unparseable line", line.slice(0, 120));
    return null;
  }
  if (typeof raw !== "object" || raw === null) return null;
  switch (raw.type) {
    case "hello":
      if (typeof raw.dt === "number" && raw.perimeter && isPair(raw.perimeter.center)) {
        return raw as HelloMessage;
      }
      break;
    case "state":
      if (
        typeof raw.t === "number" &&
        raw.pose &&
        typeof raw.pose.x === "number" &&
        typeof raw.pose.y === "number" &&
        Array.isArray(raw.goals) &&
        raw.goals.every(isPair)
      ) {
        return raw as StateMessage;
      }
      break;
    case "ack":
      if (typeof raw.command === "string" && typeof raw.effective_t === "number") {
        return raw as AckMessage;
      }
      break;
    case "error":
      if (typeof raw.message === "string") return raw as ErrorMessage;
      break;
  }
  console.warn("teleop: dropping malformed message", raw.type);
  return null;
}
