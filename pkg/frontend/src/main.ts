// Browser entry point: wires the socket, view state, canvas, and controls.

import { TeleopClient } from "./client.js";
import { renderFrame } from "./render.js";
import { boundsFromPerimeter, MapTransform } from "./transform.js";
import { clickToWaypoint, MapViewState } from "./view.js";

const canvas = document.getElementById("map") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const hud = document.getElementById("hud")!;

const view = new MapViewState();
let transform: MapTransform | null = null;

function rebuildTransform() {
  if (!view.hello) return;
  const p = view.hello.perimeter;
  transform = new MapTransform(boundsFromPerimeter(p.center, p.half_extent), canvas.width, canvas.height);
}

const wsUrl = (location.protocol === "https:" ? "wss://" : "ws://") + location.host + "/ws";
const client = new TeleopClient(
  wsUrl,
  (msg) => {
    view.apply(msg);
    if (msg.type === "hello") rebuildTransform();
  },
  (status) => view.setStatus(status),
);
client.connect();

function canvasPoint(ev: MouseEvent): [number, number] {
  const rect = canvas.getBoundingClientRect();
  const sx = ((ev.clientX - rect.left) / rect.width) * canvas.width;
  const sy = ((ev.clientY - rect.top) / rect.height) * canvas.height;
  return [sx, sy];
}

canvas.addEventListener("click", (ev) => {
  if (!transform) return;
  const [sx, sy] = canvasPoint(ev);
  const mode = ev.shiftKey ? "append" : "replace";
  const cmd = clickToWaypoint(view, transform, sx, sy, mode);
  if (cmd && client.send(cmd)) view.recordSent(cmd);
});

for (const kind of ["pause", "resume", "reset"] as const) {
  const button = document.getElementById("btn-" + kind);
  if (button) button.addEventListener("click", () => client.send({ type: kind }));
}

function hudText(): string {
  const lines = ["status: " + view.status];
  if (view.hello) {
    lines.push("agent: " + view.hello.agent_kind);
    lines.push("command delay: " + view.hello.delay_ms.toFixed(0) + " ms");
  }
  const s = view.latest;
  if (s) {
    lines.push("t: " + s.t.toFixed(2) + " s   tick: " + s.tick);
    lines.push("pose: (" + s.pose.x.toFixed(2) + ", " + s.pose.y.toFixed(2) + ")");
    lines.push("waypoints reached: " + s.waypoints_reached + " / " + s.goals.length);
    if (s.done) lines.push("episode done");
  }
  if (view.pending.length > 0) lines.push("pending commands: " + view.pending.length);
  if (view.lastError) lines.push("last error: " + view.lastError);
  lines.push("");
  lines.push("click: set waypoint  |  shift-click: append");
  return lines.join("\n");
}

function loop() {
  if (transform) {
    renderFrame(ctx as any, view, transform);
  }
  hud.textContent = hudText();
  requestAnimationFrame(loop);
}
requestAnimationFrame(loop);
