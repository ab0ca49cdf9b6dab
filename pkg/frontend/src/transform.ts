// Pixel <-> workspace coordinate mapping for the canvas view.
//
// The 35x35 mm workspace is drawn centered and scaled to fit; workspace y
// points up while canvas y points down, so the vertical axis flips.

export const WORKSPACE_MM = 35.0;
export const GRID_CELL_MM = 0.5;

export interface ClampedPoint {
  x_mm: number;
  y_mm: number;
  clamped: boolean;
}

export class WorkspaceTransform {
  readonly scale: number; // px per mm
  readonly cx: number;
  readonly cy: number;

  constructor(readonly widthPx: number, readonly heightPx: number, margin = 10) {
    const usable = Math.min(widthPx, heightPx) - 2 * margin;
    this.scale = usable / WORKSPACE_MM;
    this.cx = widthPx / 2;
    this.cy = heightPx / 2;
  }

  toPixel(xMm: number, yMm: number): [number, number] {
    return [this.cx + xMm * this.scale, this.cy - yMm * this.scale];
  }

  toWorkspace(xPx: number, yPx: number): [number, number] {
    return [(xPx - this.cx) / this.scale, (this.cy - yPx) / this.scale];
  }

  mmToPx(mm: number): number {
    return mm * this.scale;
  }

  // Click handling: map to workspace and clamp into the usable area so
  // near-boundary clicks become valid goals (flagged for the operator).
  clickToGoal(xPx: number, yPx: number, marginMm = 1.5): ClampedPoint {
    const [x, y] = this.toWorkspace(xPx, yPx);
    const half = WORKSPACE_MM / 2 - marginMm;
    const cx = Math.max(-half, Math.min(half, x));
    const cy = Math.max(-half, Math.min(half, y));
    return { x_mm: cx, y_mm: cy, clamped: cx !== x || cy !== y };
  }
}
