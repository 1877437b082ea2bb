// Map drawing. Works against a structural subset of CanvasRenderingContext2D
// so tests can pass a recording fake instead of a real canvas.

import { MapTransform } from "./transform.js";
import { MapViewState } from "./view.js";

export interface Canvas2D {
  fillStyle: any;
  strokeStyle: any;
  lineWidth: number;
  font: string;
  textAlign: any;
  globalAlpha: number;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  closePath(): void;
  stroke(): void;
  fill(): void;
  setLineDash(segments: number[]): void;
  fillText(text: string, x: number, y: number): void;
  save(): void;
  restore(): void;
  translate(x: number, y: number): void;
  rotate(angle: number): void;
}

const COLORS = {
  background: "#10141a",
  perimeter: "#4a6076",
  trail: "#3f87c5",
  goalDone: "#3c5a46",
  goalCurrent: "#58d68d",
  goalQueued: "#2e8b57",
  pending: "#e6b84c",
  agent: "#f2f5f8",
  text: "#c8d2dc",
};

function drawGoalMarker(
  ctx: Canvas2D,
  tf: MapTransform,
  goal: [number, number],
  radiusWorld: number,
  color: string,
  label: string,
) {
  const [sx, sy] = tf.toScreen(goal[0], goal[1]);
  ctx.strokeStyle = color;
  ctx.fillStyle = color;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  ctx.arc(sx, sy, radiusWorld * tf.scale, 0, Math.PI * 2);
  ctx.stroke();
  ctx.beginPath();
  ctx.arc(sx, sy, 3, 0, Math.PI * 2);
  ctx.fill();
  ctx.fillText(label, sx + 8, sy - 8);
}

/**
 * Draw one frame: perimeter, trail, goal queue with acceptance circles,
 * pending ghosts, agent pose. Returns false (nothing drawn beyond the
 * backdrop) until both hello and a first state frame have arrived.
 */
export function renderFrame(ctx: Canvas2D, view: MapViewState, tf: MapTransform): boolean {
  ctx.save();
  ctx.setLineDash([]);
  ctx.globalAlpha = 1;
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, tf.width, tf.height);

  const hello = view.hello;
  const state = view.latest;
  if (!hello || !state) {
    ctx.fillStyle = COLORS.text;
    ctx.font = "14px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText("waiting for telemetry...", tf.width / 2, tf.height / 2);
    ctx.restore();
    return false;
  }

  // training perimeter
  const half = hello.perimeter.half_extent;
  const [px, py] = tf.toScreen(hello.perimeter.center[0] - half, hello.perimeter.center[1] + half);
  const side = 2 * half * tf.scale;
  ctx.strokeStyle = COLORS.perimeter;
  ctx.lineWidth = 1;
  ctx.setLineDash([6, 4]);
  ctx.strokeRect(px, py, side, side);
  ctx.setLineDash([]);

  // trail
  if (view.trail.length > 1) {
    ctx.strokeStyle = COLORS.trail;
    ctx.lineWidth = 1;
    ctx.beginPath();
    const [tx0, ty0] = tf.toScreen(view.trail[0].x, view.trail[0].y);
    ctx.moveTo(tx0, ty0);
    for (let i = 1; i < view.trail.length; i++) {
      const [sx, sy] = tf.toScreen(view.trail[i].x, view.trail[i].y);
      ctx.lineTo(sx, sy);
    }
    ctx.stroke();
  }

  // goal queue with acceptance circles at the boundary radius
  ctx.font = "12px sans-serif";
  ctx.textAlign = "left";
  const radius = hello.boundary[0];
  state.goals.forEach((goal, i) => {
    const color =
      i < state.current_index
        ? COLORS.goalDone
        : i === state.current_index
          ? COLORS.goalCurrent
          : COLORS.goalQueued;
    drawGoalMarker(ctx, tf, goal, radius, color, String(i + 1));
  });

  // pending commands: ghost markers with a countdown until they apply
  ctx.setLineDash([3, 3]);
  for (const p of view.pending) {
    const remaining = view.countdown(p);
    for (const wp of p.waypoints) {
      drawGoalMarker(ctx, tf, wp, radius, COLORS.pending, remaining.toFixed(1) + "s");
    }
  }
  ctx.setLineDash([]);

  // agent: triangle pointing along yaw
  const [ax, ay] = tf.toScreen(state.pose.x, state.pose.y);
  ctx.save();
  ctx.translate(ax, ay);
  ctx.rotate(-state.pose.yaw);
  ctx.fillStyle = COLORS.agent;
  ctx.beginPath();
  ctx.moveTo(9, 0);
  ctx.lineTo(-6, 5);
  ctx.lineTo(-6, -5);
  ctx.closePath();
  ctx.fill();
  ctx.restore();

  // status line
  ctx.fillStyle = view.status === "connected" ? COLORS.text : COLORS.pending;
  ctx.font = "13px monospace";
  ctx.textAlign = "left";
  const flags = [view.status, "t=" + state.t.toFixed(2), "hits=" + state.waypoints_reached];
  if (state.done) flags.push("done");
  ctx.fillText(flags.join("  "), 12, 20);

  ctx.restore();
  return true;
}
