// Canvas rendering of the workspace scene. Pure function of the view model
// so tests can drive it with a mocked 2D context.

import { WorkspaceTransform, WORKSPACE_MM } from "./transform.js";
import { ViewModel } from "./viewmodel.js";

const MODULE_COLORS: Record<string, string> = {
  free: "#4f9dde",
  fixed: "#e67e22",
  gripper: "#27ae60",
};
const CUBE_MM = 3.0;

export function renderFrame(
  vm: ViewModel,
  ctx: CanvasRenderingContext2D,
  tf: WorkspaceTransform,
): void {
  const w = tf.widthPx;
  const h = tf.heightPx;
  ctx.clearRect(0, 0, w, h);
  ctx.fillStyle = "#11151a";
  ctx.fillRect(0, 0, w, h);

  // workspace boundary to scale
  const half = WORKSPACE_MM / 2;
  const [x0, y0] = tf.toPixel(-half, half);
  const side = tf.mmToPx(WORKSPACE_MM);
  ctx.strokeStyle = "#3a4a5a";
  ctx.lineWidth = 2;
  ctx.strokeRect(x0, y0, side, side);

  const update = vm.latest;
  if (update) {
    // occupancy overlay: raw obstacle polygons
    ctx.fillStyle = "rgba(200, 70, 70, 0.45)";
    for (const poly of update.obstacles_mm) {
      ctx.beginPath();
      poly.forEach(([px, py], k) => {
        const [cx, cy] = tf.toPixel(px, py);
        if (k === 0) ctx.moveTo(cx, cy);
        else ctx.lineTo(cx, cy);
      });
      ctx.closePath();
      ctx.fill();
    }

    // planned path polyline (server-sent grid cells)
    if (update.plan_cells.length > 1) {
      ctx.strokeStyle = "#7ce38b";
      ctx.lineWidth = 1.5;
      ctx.beginPath();
      update.plan_cells.forEach(([ix, iy], k) => {
        const xMm = -half + (ix + 0.5) * 0.5;
        const yMm = -half + (iy + 0.5) * 0.5;
        const [cx, cy] = tf.toPixel(xMm, yMm);
        if (k === 0) ctx.moveTo(cx, cy);
        else ctx.lineTo(cx, cy);
      });
      ctx.stroke();
    }

    // bonds as links between module centers
    ctx.strokeStyle = "#d4c26a";
    ctx.lineWidth = 3;
    for (const mod of update.modules) {
      for (const other of mod.bonds) {
        if (other > mod.id) {
          const peer = update.modules.find((m) => m.id === other);
          if (!peer) continue;
          ctx.beginPath();
          ctx.moveTo(...tf.toPixel(mod.x_mm, mod.y_mm));
          ctx.lineTo(...tf.toPixel(peer.x_mm, peer.y_mm));
          ctx.stroke();
        }
      }
    }

    // modules as 3 mm squares colored by type
    const cube = tf.mmToPx(CUBE_MM);
    for (const mod of update.modules) {
      const [cx, cy] = tf.toPixel(mod.x_mm, mod.y_mm);
      ctx.fillStyle = MODULE_COLORS[mod.type] ?? "#aaaaaa";
      ctx.fillRect(cx - cube / 2, cy - cube / 2, cube, cube);
      ctx.fillStyle = "#ffffff";
      ctx.font = "10px sans-serif";
      ctx.fillText(String(mod.id), cx - 3, cy + 3);
    }
  }

  // goal marker (hollow until acked)
  if (vm.goal) {
    const [gx, gy] = tf.toPixel(vm.goal.x_mm, vm.goal.y_mm);
    ctx.strokeStyle = vm.goal.pending ? "#999999" : "#ff5f9e";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(gx, gy, 6, 0, 2 * Math.PI);
    ctx.stroke();
  }

  // disconnect / staleness banner greys the scene
  if (vm.stale()) {
    ctx.fillStyle = "rgba(20, 20, 20, 0.6)";
    ctx.fillRect(0, 0, w, h);
    ctx.fillStyle = "#eeeeee";
    ctx.font = "16px sans-serif";
    ctx.fillText(vm.connected ? "stream stalled…" : "disconnected — reconnecting…",
                 w / 2 - 90, h / 2);
  }
}
