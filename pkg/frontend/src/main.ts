// Application wiring: socket lifecycle, canvas interaction, joystick pad,
// preset buttons and readouts. Configure with URL parameters:
//   ?host=127.0.0.1&port=8765&scenario=maze (scenario is display-only)

import { FieldJoystick } from "./joystick.js";
import { CommandClient } from "./protocol.js";
import { renderFrame } from "./render.js";
import { WorkspaceTransform } from "./transform.js";
import { ServerMessage } from "./types.js";
import { ViewModel } from "./viewmodel.js";

const PRESETS = [
  ["assemble_chain", "assemble chain"],
  ["chain_to_gripper", "chain → gripper"],
  ["chain_to_square", "chain → square"],
  ["disassemble", "disassemble"],
] as const;

export class ConsoleApp {
  readonly vm = new ViewModel();
  client: CommandClient | null = null;
  joystick: FieldJoystick | null = null;
  private tf: WorkspaceTransform;
  private socket: WebSocket | null = null;

  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly statusEl: HTMLElement,
    private readonly logEl: HTMLElement,
    private readonly url: string,
  ) {
    this.tf = new WorkspaceTransform(canvas.width, canvas.height);
    canvas.addEventListener("click", (ev) => this.onClick(ev));
  }

  connect(): void {
    const socket = new WebSocket(this.url);
    this.socket = socket;
    const client = new CommandClient({ send: (d) => socket.send(d) });
    this.client = client;
    this.joystick = new FieldJoystick((target) =>
      client.send("set_field", { target }),
    );
    socket.onopen = () => {
      this.vm.connected = true;
      this.vm.notice = "";
    };
    socket.onclose = () => {
      this.vm.connected = false;
      setTimeout(() => this.connect(), 1000); // reconnect banner shows meanwhile
    };
    socket.onmessage = (ev) => this.onMessage(JSON.parse(ev.data as string));
  }

  onMessage(msg: ServerMessage): void {
    this.vm.ingest(msg);
    if (msg.type === "ack" || msg.type === "error") {
      const outcome = this.client?.handleReply(msg);
      if (outcome) {
        this.vm.resolveGoal(outcome.seq, outcome.ok, outcome.message);
        if (!outcome.ok) {
          this.vm.notice = outcome.message ?? "command rejected";
        }
      }
    }
    if (msg.type === "event") {
      const row = document.createElement("div");
      row.textContent = `t=${msg.t.toFixed(2)}s ${msg.kind} ${msg.participants}`;
      this.logEl.prepend(row);
      while (this.logEl.childElementCount > 40) {
        this.logEl.lastElementChild?.remove();
      }
    }
  }

  onClick(ev: MouseEvent): void {
    if (!this.client) return;
    const rect = this.canvas.getBoundingClientRect();
    const goal = this.tf.clickToGoal(ev.clientX - rect.left, ev.clientY - rect.top);
    const seq = this.client.send("set_goal", {
      x_mm: goal.x_mm,
      y_mm: goal.y_mm,
    });
    this.vm.markGoal(goal.x_mm, goal.y_mm, seq);
    this.vm.notice = goal.clamped ? "goal clamped to workspace" : "";
  }

  startSequence(name: string): void {
    this.client?.send("start_sequence", { name });
  }

  draw(): void {
    const ctx = this.canvas.getContext("2d");
    if (ctx) {
      renderFrame(this.vm, ctx, this.tf);
    }
    const u = this.vm.latest;
    const field = this.vm.fieldReadoutMt().toFixed(2);
    const owner = u?.owner_connected ? "held" : "free";
    this.statusEl.textContent = u
      ? `t=${u.time.toFixed(2)}s |B|=${field} mT label=${u.label} ` +
        `ownership=${owner} ${u.paused ? "PAUSED " : ""}${this.vm.notice}`
      : `connecting… ${this.vm.notice}`;
  }
}

export function startConsole(doc: Document = document): ConsoleApp {
  const params = new URLSearchParams(doc.defaultView?.location.search ?? "");
  const host = params.get("host") ?? "127.0.0.1";
  const port = params.get("port") ?? "8765";
  const canvas = doc.getElementById("workspace") as HTMLCanvasElement;
  const status = doc.getElementById("status") as HTMLElement;
  const log = doc.getElementById("events") as HTMLElement;
  const app = new ConsoleApp(canvas, status, log, `ws://${host}:${port}/`);

  const presets = doc.getElementById("presets") as HTMLElement;
  for (const [name, label] of PRESETS) {
    const btn = doc.createElement("button");
    btn.textContent = label;
    btn.addEventListener("click", () => app.startSequence(name));
    presets.appendChild(btn);
  }
  for (const [id, type] of [["pause", "pause"], ["resume", "resume"],
                            ["reset", "reset"]] as const) {
    doc.getElementById(id)?.addEventListener("click", () =>
      app.client?.send(type),
    );
  }

  // joystick pad: pointer position inside the pad sets direction, the
  // slider sets magnitude; releasing zeroes the field
  const pad = doc.getElementById("joystick") as HTMLElement;
  const slider = doc.getElementById("magnitude") as HTMLInputElement;
  let active = false;
  const sample = (ev: PointerEvent) => {
    const rect = pad.getBoundingClientRect();
    const dx = (ev.clientX - rect.left) / rect.width - 0.5;
    const dy = 0.5 - (ev.clientY - rect.top) / rect.height;
    app.joystick?.move({
      dirX: dx * 2,
      dirY: dy * 2,
      magnitudeMt: parseFloat(slider.value),
    });
  };
  pad.addEventListener("pointerdown", (ev) => {
    active = true;
    sample(ev);
  });
  pad.addEventListener("pointermove", (ev) => {
    if (active) sample(ev);
  });
  const release = () => {
    if (active) {
      active = false;
      app.joystick?.release();
    }
  };
  pad.addEventListener("pointerup", release);
  pad.addEventListener("pointerleave", release);

  app.connect();
  const loop = () => {
    app.draw();
    doc.defaultView?.requestAnimationFrame(loop);
  };
  loop();
  return app;
}

declare global {
  interface Window {
    millibotsConsole?: ConsoleApp;
  }
}

if (typeof document !== "undefined" && document.getElementById("workspace")) {
  window.millibotsConsole = startConsole();
}
