import { describe, expect, it } from "vitest";
import { Canvas2D, renderFrame } from "../src/render.js";
import { boundsFromPerimeter, MapTransform } from "../src/transform.js";
import { MapViewState } from "../src/view.js";

// Records drawing calls so assertions can inspect what was drawn where.
function fakeContext() {
  const ops: { op: string; args: any[] }[] = [];
  const record = (op: string) => (...args: any[]) => void ops.push({ op, args });
  const ctx: Canvas2D = {
    fillStyle: "",
    strokeStyle: "",
    lineWidth: 1,
    font: "",
    textAlign: "left",
    globalAlpha: 1,
    clearRect: record("clearRect"),
    fillRect: record("fillRect"),
    strokeRect: record("strokeRect"),
    beginPath: record("beginPath"),
    moveTo: record("moveTo"),
    lineTo: record("lineTo"),
    arc: record("arc"),
    closePath: record("closePath"),
    stroke: record("stroke"),
    fill: record("fill"),
    setLineDash: record("setLineDash"),
    fillText: record("fillText"),
    save: record("save"),
    restore: record("restore"),
    translate: record("translate"),
    rotate: record("rotate"),
  };
  return { ctx, ops };
}

const TF = new MapTransform(boundsFromPerimeter([10, 10], 2.5), 720, 720);

function readyView(): MapViewState {
  const view = new MapViewState();
  view.setStatus("connected");
  view.apply({
    type: "hello",
    agent_kind: "point-mass",
    delay_ms: 1000,
    dt: 0.05,
    telemetry_every: 2,
    perimeter: { center: [10, 10], half_extent: 2.5 },
    boundary: [1, 1],
    strict_clock: false,
  });
  view.apply({
    type: "state",
    tick: 4,
    t: 0.2,
    pose: { x: 10, y: 10, yaw: 0.3 },
    joints: [],
    goals: [[14, 14]],
    current_index: 0,
    waypoints_reached: 0,
    done: false,
  });
  return view;
}

describe("renderFrame", () => {
  it("skips the scene until telemetry arrives", () => {
    const { ctx, ops } = fakeContext();
    const drawn = renderFrame(ctx, new MapViewState(), TF);
    expect(drawn).toBe(false);
    expect(ops.filter((o) => o.op === "arc").length).toBe(0);
  });

  it("draws the agent at the map center when it sits at the arena center", () => {
    const { ctx, ops } = fakeContext();
    expect(renderFrame(ctx, readyView(), TF)).toBe(true);
    const translate = ops.find((o) => o.op === "translate");
    expect(translate).toBeDefined();
    expect(translate!.args[0]).toBeCloseTo(360, 6);
    expect(translate!.args[1]).toBeCloseTo(360, 6);
  });

  it("puts the goal marker for (14,14) outside the perimeter square", () => {
    const { ctx, ops } = fakeContext();
    renderFrame(ctx, readyView(), TF);
    const rect = ops.find((o) => o.op === "strokeRect")!;
    const [rx, ry, rw, rh] = rect.args;
    // acceptance circle arc: radius = boundary * scale
    const goalArc = ops.find((o) => o.op === "arc" && Math.abs(o.args[2] - TF.scale) < 1e-9)!;
    const [gx, gy] = goalArc.args;
    const inside = gx >= rx && gx <= rx + rw && gy >= ry && gy <= ry + rh;
    expect(inside).toBe(false);
  });

  it("renders pending commands as ghosts with a countdown label", () => {
    const { ctx, ops } = fakeContext();
    const view = readyView();
    view.recordSent({ type: "set_waypoints", waypoints: [[12, 9]] });
    renderFrame(ctx, view, TF);
    const labels = ops.filter((o) => o.op === "fillText").map((o) => o.args[0]);
    expect(labels).toContain("1.0s");
  });

  it("draws the trail as a polyline over the visited poses", () => {
    const { ctx, ops } = fakeContext();
    const view = readyView();
    for (let i = 0; i < 5; i++) {
      view.apply({
        type: "state",
        tick: 5 + i,
        t: 0.25 + i * 0.05,
        pose: { x: 10 + i * 0.1, y: 10, yaw: 0 },
        joints: [],
        goals: [[14, 14]],
        current_index: 0,
        waypoints_reached: 0,
        done: false,
      });
    }
    renderFrame(ctx, view, TF);
    expect(ops.filter((o) => o.op === "lineTo").length).toBeGreaterThanOrEqual(5);
  });
});
