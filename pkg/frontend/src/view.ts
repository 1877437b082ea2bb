// Client-side session state: the latest telemetry slot, a bounded pose
// trail, and the pending-command list that makes link latency visible.

import {
  Command,
  HelloMessage,
  ServerMessage,
  SetWaypointsCommand,
  StateMessage,
} from "./protocol.js";
import { MapTransform } from "./transform.js";

export type ConnectionStatus = "connecting" | "connected" | "disconnected";

export interface PendingCommand {
  waypoints: [number, number][];
  /** Simulated time the server will apply the command; null until acked. */
  effectiveT: number | null;
}

const TRAIL_LIMIT = 2000;
const GOAL_EPS = 1e-9;

function goalsEqual(a: [number, number][], b: [number, number][]): boolean {
  if (a.length !== b.length) return false;
  for (let i = 0; i < a.length; i++) {
    if (Math.abs(a[i][0] - b[i][0]) > GOAL_EPS) return false;
    if (Math.abs(a[i][1] - b[i][1]) > GOAL_EPS) return false;
  }
  return true;
}

export class MapViewState {
  status: ConnectionStatus = "connecting";
  hello: HelloMessage | null = null;
  latest: StateMessage | null = null;
  trail: { x: number; y: number }[] = [];
  pending: PendingCommand[] = [];
  lastError: string | null = null;
  readonly trailLimit: number;

  constructor(trailLimit = TRAIL_LIMIT) {
    this.trailLimit = trailLimit;
  }

  setStatus(status: ConnectionStatus) {
    this.status = status;
  }

  /** Fold one server message into the view. */
  apply(msg: ServerMessage) {
    switch (msg.type) {
      case "hello":
        this.hello = msg;
        break;
      case "state":
        this.latest = msg;
        this.trail.push({ x: msg.pose.x, y: msg.pose.y });
        if (this.trail.length > this.trailLimit) {
          this.trail.splice(0, this.trail.length - this.trailLimit);
        }
        // A pending command is only retired once the server's queue shows it.
        this.pending = this.pending.filter((p) => !goalsEqual(p.waypoints, msg.goals));
        break;
      case "ack": {
        if (msg.command === "set_waypoints") {
          const waiting = this.pending.find((p) => p.effectiveT === null);
          if (waiting) waiting.effectiveT = msg.effective_t;
        }
        break;
      }
      case "error":
        this.lastError = msg.message;
        console.warn("server rejected command:", msg.message);
        break;
    }
  }

  /** Track an outgoing set_waypoints so it can render as a ghost. */
  recordSent(cmd: Command) {
    if (cmd.type === "set_waypoints") {
      this.pending.push({ waypoints: cmd.waypoints, effectiveT: null });
    }
  }

  /** Seconds of simulated time until a pending command takes effect. */
  countdown(p: PendingCommand): number {
    const delay = this.hello ? this.hello.delay_ms / 1000 : 0;
    if (p.effectiveT === null || this.latest === null) return delay;
    return Math.max(0, p.effectiveT - this.latest.t);
  }
}

/**
 * Turn a canvas click into a waypoint command. Returns null when the click
 * cannot produce one: no live connection, no transform yet, or the click
 * lands outside the drawable world window.
 */
export function clickToWaypoint(
  view: MapViewState,
  transform: MapTransform,
  sx: number,
  sy: number,
  mode: "replace" | "append",
): SetWaypointsCommand | null {
  if (view.status !== "connected") return null;
  const [wx, wy] = transform.toWorld(sx, sy);
  if (!transform.contains(wx, wy)) return null;
  const point: [number, number] = [wx, wy];
  if (mode === "append" && view.latest) {
    return { type: "set_waypoints", waypoints: [...view.latest.goals, point] };
  }
  return { type: "set_waypoints", waypoints: [point] };
}
