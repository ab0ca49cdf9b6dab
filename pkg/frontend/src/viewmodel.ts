// View model between the socket and the renderer. Tracks the latest state,
// the event feed, pending goal markers and staleness; rendering never reads
// the socket directly.

import { fieldMagnitudeMt } from "./coils.js";
import { EventMessage, ServerMessage, StateUpdate } from "./types.js";

export const BROADCAST_PERIOD_MS = 50; // server broadcasts at 20 Hz
export const STALE_AFTER = 3; // periods without an update = stale

export interface GoalMarker {
  x_mm: number;
  y_mm: number;
  pending: boolean; // not yet acked by the server
  seq: number;
}

export class ViewModel {
  latest: StateUpdate | null = null;
  events: EventMessage[] = [];
  connected = false;
  notice = "";
  goal: GoalMarker | null = null;
  lastUpdateAt = -Infinity;
  private lastSeq = -1;
  seqGaps = 0;

  constructor(private readonly now: () => number = () => performance.now()) {}

  ingest(msg: ServerMessage): void {
    if (msg.type === "state_update") {
      if (this.lastSeq >= 0 && msg.seq <= this.lastSeq) {
        return; // never render backwards
      }
      if (this.lastSeq >= 0 && msg.seq > this.lastSeq + 2) {
        this.seqGaps += 1;
      }
      this.lastSeq = msg.seq;
      this.latest = msg;
      this.lastUpdateAt = this.now();
    } else if (msg.type === "event") {
      this.events.push(msg);
      if (this.events.length > 200) {
        this.events.shift();
      }
    }
  }

  markGoal(xMm: number, yMm: number, seq: number): void {
    this.goal = { x_mm: xMm, y_mm: yMm, pending: true, seq };
  }

  resolveGoal(seq: number, ok: boolean, message?: string): void {
    if (this.goal && this.goal.seq === seq) {
      if (ok) {
        this.goal.pending = false;
      } else {
        this.goal = null;
        this.notice = message ?? "goal rejected";
      }
    }
  }

  stale(): boolean {
    return (
      !this.connected ||
      this.now() - this.lastUpdateAt > STALE_AFTER * BROADCAST_PERIOD_MS
    );
  }

  fieldReadoutMt(): number {
    if (!this.latest) {
      return 0;
    }
    // server-echoed currents are authoritative for the readout
    return fieldMagnitudeMt(this.latest.field_mT[0], this.latest.field_mT[1]);
  }

  moduleCount(): number {
    return this.latest ? this.latest.modules.length : 0;
  }
}
