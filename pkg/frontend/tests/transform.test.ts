import { describe, expect, it } from "vitest";

import { GRID_CELL_MM, WorkspaceTransform } from "../src/transform.js";

describe("workspace transform", () => {
  const tf = new WorkspaceTransform(560, 560);

  it("round-trips within half a pixel", () => {
    for (const [x, y] of [[-17, -17], [0, 0], [12.3, -4.7], [17, 17]]) {
      const [px, py] = tf.toPixel(x, y);
      const [bx, by] = tf.toWorkspace(px, py);
      expect(Math.abs(tf.toPixel(bx, by)[0] - px)).toBeLessThan(0.5);
      expect(Math.abs(tf.toPixel(bx, by)[1] - py)).toBeLessThan(0.5);
      expect(bx).toBeCloseTo(x, 6);
      expect(by).toBeCloseTo(y, 6);
    }
  });

  it("canvas center maps to the workspace origin within one grid cell", () => {
    const goal = tf.clickToGoal(280, 280);
    expect(Math.abs(goal.x_mm)).toBeLessThanOrEqual(GRID_CELL_MM);
    expect(Math.abs(goal.y_mm)).toBeLessThanOrEqual(GRID_CELL_MM);
    expect(goal.clamped).toBe(false);
  });

  it("vertical axis flips between canvas and workspace", () => {
    const [, pyTop] = tf.toPixel(0, 10);
    const [, pyBottom] = tf.toPixel(0, -10);
    expect(pyTop).toBeLessThan(pyBottom);
  });

  it("clicks near the boundary clamp into the workspace and flag it", () => {
    const goal = tf.clickToGoal(1, 1);
    expect(goal.clamped).toBe(true);
    expect(Math.abs(goal.x_mm)).toBeLessThanOrEqual(17.5 - 1.5);
    expect(Math.abs(goal.y_mm)).toBeLessThanOrEqual(17.5 - 1.5);
  });
});
