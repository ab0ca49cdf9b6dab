// Manual field joystick: direction vector plus magnitude slider, mapped to
// a uniform-field target. Messages are rate limited to 10 Hz; releasing
// always sends an immediate all-zero field.

import { FIELD_CEILING_MT } from "./coils.js";
import { FieldTarget } from "./types.js";

export const COMMAND_RATE_HZ = 10;

export interface JoystickSample {
  dirX: number; // unit-ish direction from the stick, 0..1 deflection
  dirY: number;
  magnitudeMt: number; // slider value
}

export class FieldJoystick {
  private lastSent = -Infinity;
  private pendingZero = false;

  constructor(
    private readonly send: (target: FieldTarget) => void,
    private readonly now: () => number = () => performance.now(),
  ) {}

  // Clamp the requested magnitude at the coil ceiling (the slider snaps back).
  clampMagnitude(magnitudeMt: number): number {
    return Math.min(Math.abs(magnitudeMt), FIELD_CEILING_MT);
  }

  target(sample: JoystickSample): FieldTarget {
    const norm = Math.hypot(sample.dirX, sample.dirY);
    if (norm < 1e-9) {
      return { bx_mT: 0, by_mT: 0 };
    }
    const mag = this.clampMagnitude(sample.magnitudeMt);
    return {
      bx_mT: (sample.dirX / norm) * mag,
      by_mT: (sample.dirY / norm) * mag,
    };
  }

  move(sample: JoystickSample): boolean {
    const t = this.now();
    if (t - this.lastSent < 1000 / COMMAND_RATE_HZ) {
      return false;
    }
    this.lastSent = t;
    this.send(this.target(sample));
    this.pendingZero = true;
    return true;
  }

  release(): void {
    if (!this.pendingZero) {
      return;
    }
    this.pendingZero = false;
    this.lastSent = this.now();
    this.send({ bx_mT: 0, by_mT: 0 });
  }
}
