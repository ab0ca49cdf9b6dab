import { describe, expect, it } from "vitest";

import { CommandClient } from "../src/protocol.js";
import { StateUpdate } from "../src/types.js";
import { BROADCAST_PERIOD_MS, ViewModel } from "../src/viewmodel.js";

function update(seq: number, time: number, extra: Partial<StateUpdate> = {}):
    StateUpdate {
  return {
    type: "state_update",
    seq,
    time,
    paused: false,
    modules: [
      { id: 0, type: "free", x_mm: 0, y_mm: 0, heading: 0, orient: 0, bonds: [] },
      { id: 1, type: "free", x_mm: 3, y_mm: 0, heading: 0, orient: 0, bonds: [] },
    ],
    currents: { i_hx: 0.834, i_hy: 0, i_mx: 0, i_my: 0 },
    field_mT: [1.5, 0],
    gradients_T_per_m: [0, 0],
    label: "liquid",
    obstacles_mm: [],
    plan_cells: [],
    nav: { active: false },
    owner_connected: false,
    backend: "compiled",
    ...extra,
  };
}

describe("view model", () => {
  it("renders the roster and the echoed field magnitude", () => {
    const vm = new ViewModel(() => 0);
    vm.ingest(update(1, 0.05));
    expect(vm.moduleCount()).toBe(2);
    expect(vm.fieldReadoutMt()).toBeCloseTo(1.5, 9);
  });

  it("ignores out-of-order updates", () => {
    const vm = new ViewModel(() => 0);
    vm.ingest(update(5, 0.25));
    vm.ingest(update(3, 0.15));
    expect(vm.latest?.seq).toBe(5);
  });

  it("goes stale after three broadcast periods without updates", () => {
    let clock = 0;
    const vm = new ViewModel(() => clock);
    vm.connected = true;
    vm.ingest(update(1, 0.05));
    expect(vm.stale()).toBe(false);
    clock += 2 * BROADCAST_PERIOD_MS;
    expect(vm.stale()).toBe(false);
    clock += 2 * BROADCAST_PERIOD_MS;
    expect(vm.stale()).toBe(true);
  });

  it("keeps a bounded event feed", () => {
    const vm = new ViewModel(() => 0);
    for (let k = 0; k < 250; k++) {
      vm.ingest({ type: "event", seq: k, t: k * 0.01, kind: "stall",
                  participants: [0] });
    }
    expect(vm.events.length).toBe(200);
  });

  it("goal markers stay pending until their ack arrives", () => {
    const vm = new ViewModel(() => 0);
    vm.markGoal(5, 5, 7);
    expect(vm.goal?.pending).toBe(true);
    vm.resolveGoal(7, true);
    expect(vm.goal?.pending).toBe(false);
  });

  it("rejected goals clear the marker and surface the notice", () => {
    const vm = new ViewModel(() => 0);
    vm.markGoal(0, -5, 9);
    vm.resolveGoal(9, false, "goal cell (35, 25) is occupied");
    expect(vm.goal).toBeNull();
    expect(vm.notice).toContain("occupied");
  });
});

describe("command client", () => {
  it("tracks pending commands until acked or errored", () => {
    const sent: string[] = [];
    const client = new CommandClient({ send: (d) => sent.push(d) });
    const s1 = client.send("pause");
    const s2 = client.send("set_goal", { x_mm: 1, y_mm: 2 });
    expect(client.pendingCount()).toBe(2);
    expect(client.handleReply({ type: "ack", seq: s1 })?.ok).toBe(true);
    expect(client.handleReply({ type: "error", seq: s2, message: "busy" })?.ok)
      .toBe(false);
    expect(client.hasPending()).toBe(false);
    expect(JSON.parse(sent[1]).x_mm).toBe(1);
  });

  it("ignores replies for unknown sequence numbers", () => {
    const client = new CommandClient({ send: () => undefined });
    expect(client.handleReply({ type: "ack", seq: 99 })).toBeNull();
  });
});
