// Wire protocol message shapes (see docs/formats.md in the repo root).

export interface ModuleSnapshot {
  id: number;
  type: "free" | "fixed" | "gripper";
  x_mm: number;
  y_mm: number;
  heading: number;
  orient: number;
  bonds: number[];
}

export interface StateUpdate {
  type: "state_update";
  seq: number;
  time: number;
  paused: boolean;
  modules: ModuleSnapshot[];
  currents: { i_hx: number; i_hy: number; i_mx: number; i_my: number };
  field_mT: [number, number];
  gradients_T_per_m: [number, number];
  label: string;
  obstacles_mm: number[][][];
  plan_cells: number[][];
  nav: { active: boolean; reached?: boolean | null; aborted?: string | null };
  owner_connected: boolean;
  backend: string;
}

export interface EventMessage {
  type: "event";
  seq: number;
  t: number;
  kind: string;
  participants: (number | string)[];
}

export interface AckMessage {
  type: "ack";
  seq: number;
}

export interface ErrorMessage {
  type: "error";
  seq: number | null;
  message: string;
}

export type ServerMessage = StateUpdate | EventMessage | AckMessage | ErrorMessage;

export interface FieldTarget {
  bx_mT: number;
  by_mT: number;
  gx_T_per_m?: number;
  gy_T_per_m?: number;
}
