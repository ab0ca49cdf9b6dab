"""Step-kernel benchmark: compiled extension versus the numpy-free fallback.

Runs the same three-module reconfiguration workload through every
importable backend and reports steps/second and the cross-backend
trajectory deviation (expected zero: both kernels evaluate the same
expressions in the same order).
"""

from __future__ import annotations

import time

import numpy as np

from ._kernels import get_backends
from .sim import Engine, SimConfig
from .sim import sequences as seqs


def _run(kernel, steps: int):
    world = seqs.gripper_chain_world()
    cfg = SimConfig()
    engine = Engine(world, cfg, kernel=kernel)
    cmds, _, _ = seqs.chain_to_gripper_sequence(engine.coils)
    active = cmds[0]
    t0 = time.perf_counter()
    for k in range(steps):
        if len(cmds) > 1 and world.time >= cmds[1].timestamp:
            active = cmds[1]
        engine.step(active)
    elapsed = time.perf_counter() - t0
    return elapsed, np.array([m.pos for m in world.modules])


def run_benchmark(steps: int = 20000) -> dict:
    backends = get_backends()
    results = {}
    final = {}
    for name, kernel in sorted(backends.items()):
        elapsed, pos = _run(kernel, steps)
        results[name] = elapsed
        final[name] = pos
        print(f"{name:>9}: {steps / elapsed:>12,.0f} steps/s  "
              f"({elapsed * 1e6 / steps:6.2f} us/step)")
    if len(results) == 2:
        speedup = results["python"] / results["compiled"]
        drift = float(np.max(np.abs(final["python"] - final["compiled"])))
        print(f"  speedup: {speedup:.1f}x   max trajectory deviation: {drift:.2e} m")
        results["speedup"] = speedup
        results["deviation"] = drift
    return results


if __name__ == "__main__":
    run_benchmark()
