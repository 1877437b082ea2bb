// World <-> screen mapping for the map canvas. One uniform scale on both
// axes, y flipped so world north points up on screen.

export interface WorldBounds {
  cx: number;
  cy: number;
  half: number; // half side length of the square view window
}

/**
 * View window derived from the arena perimeter. Wide enough that the
 * conventional start pose at the origin and retask targets outside the
 * perimeter stay on screen.
 */
export function boundsFromPerimeter(center: [number, number], halfExtent: number): WorldBounds {
  return { cx: center[0], cy: center[1], half: Math.max(12.0, halfExtent * 4.8) };
}

export class MapTransform {
  readonly bounds: WorldBounds;
  readonly width: number;
  readonly height: number;
  readonly scale: number; // pixels per world unit

  constructor(bounds: WorldBounds, widthPx: number, heightPx: number, marginPx = 24) {
    this.bounds = bounds;
    this.width = widthPx;
    this.height = heightPx;
    const usable = Math.min(widthPx, heightPx) - 2 * marginPx;
    if (usable <= 0 || bounds.half <= 0) {
      throw new Error("transform: degenerate canvas or world bounds");
    }
    this.scale = usable / (2 * bounds.half);
  }

  toScreen(wx: number, wy: number): [number, number] {
    const sx = this.width / 2 + (wx - this.bounds.cx) * this.scale;
    const sy = this.height / 2 - (wy - this.bounds.cy) * this.scale;
    return [sx, sy];
  }

  toWorld(sx: number, sy: number): [number, number] {
    const wx = this.bounds.cx + (sx - this.width / 2) / this.scale;
    const wy = this.bounds.cy - (sy - this.height / 2) / this.scale;
    return [wx, wy];
  }

  /** World-units spanned by one pixel. */
  worldPerPixel(): number {
    return 1 / this.scale;
  }

  /** True when the world point is inside the drawable view window. */
  contains(wx: number, wy: number): boolean {
    return (
      Math.abs(wx - this.bounds.cx) <= this.bounds.half &&
      Math.abs(wy - this.bounds.cy) <= this.bounds.half
    );
  }
}
