// In-browser (jsdom) test: a canvas click travels through the real DOM event
// path into a set_goal message whose coordinates round-trip within one grid
// cell, and joystick motion produces inverse-map set_field values.

// @vitest-environment jsdom

import { beforeEach, describe, expect, it, vi } from "vitest";

import { FieldJoystick } from "../src/joystick.js";
import { ConsoleApp } from "../src/main.js";
import { CommandClient } from "../src/protocol.js";
import { GRID_CELL_MM } from "../src/transform.js";

class FakeSocket {
  sent: string[] = [];
  onopen: (() => void) | null = null;
  onclose: (() => void) | null = null;
  onmessage: ((ev: { data: string }) => void) | null = null;
  send(data: string) {
    this.sent.push(data);
  }
}

function makeApp() {
  document.body.innerHTML = `
    <canvas id="workspace" width="560" height="560"></canvas>
    <div id="status"></div><div id="events"></div>`;
  const canvas = document.getElementById("workspace") as HTMLCanvasElement;
  canvas.getBoundingClientRect = () =>
    ({ left: 0, top: 0, width: 560, height: 560, right: 560, bottom: 560,
       x: 0, y: 0, toJSON: () => ({}) } as DOMRect);
  const app = new ConsoleApp(
    canvas,
    document.getElementById("status") as HTMLElement,
    document.getElementById("events") as HTMLElement,
    "ws://unused/",
  );
  const socket = new FakeSocket();
  // wire the command path without a live server
  app.client = new CommandClient(socket);
  let clock = 0;
  app.joystick = new FieldJoystick(
    (target) => app.client!.send("set_field", { target }),
    () => (clock += 200),
  );
  return { app, canvas, socket };
}

describe("console DOM integration", () => {
  beforeEach(() => {
    vi.restoreAllMocks();
  });

  it("click to set_goal round-trips within one grid cell", () => {
    const { app, canvas, socket } = makeApp();
    // click 100 px right and 50 px above center: expect (+mm, +mm)
    const ev = new MouseEvent("click", { clientX: 280 + 100, clientY: 280 - 50 });
    canvas.dispatchEvent(ev);
    expect(socket.sent).toHaveLength(1);
    const msg = JSON.parse(socket.sent[0]);
    expect(msg.type).toBe("set_goal");
    const scale = (560 - 20) / 35.0; // px per mm, matching the transform
    expect(Math.abs(msg.x_mm - 100 / scale)).toBeLessThanOrEqual(GRID_CELL_MM);
    expect(Math.abs(msg.y_mm - 50 / scale)).toBeLessThanOrEqual(GRID_CELL_MM);
    expect(app.vm.goal?.pending).toBe(true);
  });

  it("goal marker resolves when the server acks the same seq", () => {
    const { app, canvas, socket } = makeApp();
    canvas.dispatchEvent(new MouseEvent("click", { clientX: 280, clientY: 280 }));
    const seq = JSON.parse(socket.sent[0]).seq;
    app.onMessage({ type: "ack", seq });
    expect(app.vm.goal?.pending).toBe(false);
  });

  it("joystick motion emits inverse-map set_field values", () => {
    const { app, socket } = makeApp();
    app.joystick!.move({ dirX: 1, dirY: 0, magnitudeMt: 1.5 });
    const msg = JSON.parse(socket.sent[0]);
    expect(msg.type).toBe("set_field");
    expect(msg.target.bx_mT).toBeCloseTo(1.5, 9);
    expect(msg.target.by_mT).toBeCloseTo(0, 9);
    app.joystick!.release();
    const zero = JSON.parse(socket.sent[1]);
    expect(zero.target.bx_mT).toBe(0);
    expect(zero.target.by_mT).toBe(0);
  });

  it("obstacle rejection surfaces an inline notice", () => {
    const { app, canvas, socket } = makeApp();
    canvas.dispatchEvent(new MouseEvent("click", { clientX: 280, clientY: 360 }));
    const seq = JSON.parse(socket.sent[0]).seq;
    app.onMessage({ type: "error", seq, message: "goal cell (35, 25) is occupied" });
    expect(app.vm.goal).toBeNull();
    expect(app.vm.notice).toContain("occupied");
  });
});
