// Client-side mirror of the coil calibration for readouts and the joystick
// current preview. The server echo stays authoritative; these constants
// only reproduce the default analytic calibration.

const MU0 = 4 * Math.PI * 1e-7;
const HELMHOLTZ_FACTOR = Math.pow(4 / 5, 1.5);
const MAXWELL_FACTOR = (3 * Math.sqrt(3) / 2) / Math.pow(7 / 4, 2.5);

export const K_HX = HELMHOLTZ_FACTOR * MU0 * 100 / 0.05; // T/A
export const K_HY = HELMHOLTZ_FACTOR * MU0 * 176 / 0.088;
export const K_MX = MAXWELL_FACTOR * MU0 * 100 / (0.052 * 0.052); // (T/m)/A
export const K_MY = MAXWELL_FACTOR * MU0 * 152 / (0.076 * 0.076);

export const MAX_CURRENT_A = 10.0;
// achievable uniform-field ceiling along one axis, mT
export const FIELD_CEILING_MT = Math.min(K_HX, K_HY) * MAX_CURRENT_A * 1e3;

export interface CurrentPreview {
  i_hx: number;
  i_hy: number;
  feasible: boolean;
}

// Inverse of the uniform part of the field map: currents for a target
// uniform field in mT (matches the server's conversion).
export function currentsForField(bxMt: number, byMt: number): CurrentPreview {
  const iHx = (bxMt * 1e-3) / K_HX;
  const iHy = (byMt * 1e-3) / K_HY;
  return {
    i_hx: iHx,
    i_hy: iHy,
    feasible: Math.abs(iHx) <= MAX_CURRENT_A && Math.abs(iHy) <= MAX_CURRENT_A,
  };
}

export function fieldMagnitudeMt(bxMt: number, byMt: number): number {
  return Math.hypot(bxMt, byMt);
}
