import { describe, expect, it } from "vitest";
import { boundsFromPerimeter, MapTransform } from "../src/transform.js";

const BOUNDS = boundsFromPerimeter([10, 10], 2.5);
const TF = new MapTransform(BOUNDS, 720, 720);

describe("boundsFromPerimeter", () => {
  it("keeps the start pose and out-of-perimeter goals in view", () => {
    for (const [x, y] of [[0, 0], [14, 14], [7.5, 12.5]]) {
      expect(Math.abs(x - BOUNDS.cx)).toBeLessThanOrEqual(BOUNDS.half);
      expect(Math.abs(y - BOUNDS.cy)).toBeLessThanOrEqual(BOUNDS.half);
    }
  });
});

describe("MapTransform", () => {
  it("maps the world center to the canvas center", () => {
    expect(TF.toScreen(10, 10)).toEqual([360, 360]);
  });

  it("points screen-up for world north", () => {
    const [, syLow] = TF.toScreen(10, 8);
    const [, syHigh] = TF.toScreen(10, 12);
    expect(syHigh).toBeLessThan(syLow);
  });

  it("round-trips world -> screen -> world within one pixel's world size", () => {
    const step = BOUNDS.half / 3;
    for (let i = -3; i <= 3; i++) {
      for (let j = -3; j <= 3; j++) {
        const wx = BOUNDS.cx + i * step;
        const wy = BOUNDS.cy + j * step;
        const [sx, sy] = TF.toScreen(wx, wy);
        const [bx, by] = TF.toWorld(sx, sy);
        expect(Math.abs(bx - wx)).toBeLessThan(TF.worldPerPixel());
        expect(Math.abs(by - wy)).toBeLessThan(TF.worldPerPixel());
      }
    }
  });

  it("round-trips screen -> world -> screen within one pixel", () => {
    for (const [sx, sy] of [[0, 0], [123.4, 567.8], [720, 720], [360, 1]]) {
      const [wx, wy] = TF.toWorld(sx, sy);
      const [rx, ry] = TF.toScreen(wx, wy);
      expect(Math.abs(rx - sx)).toBeLessThan(1);
      expect(Math.abs(ry - sy)).toBeLessThan(1);
    }
  });

  it("reports points outside the view window", () => {
    expect(TF.contains(10, 10)).toBe(true);
    expect(TF.contains(14, 14)).toBe(true);
    expect(TF.contains(99, 10)).toBe(false);
    expect(TF.contains(10, -99)).toBe(false);
  });

  it("rejects a degenerate canvas", () => {
    expect(() => new MapTransform(BOUNDS, 10, 10, 24)).toThrow(/degenerate/);
  });
});
