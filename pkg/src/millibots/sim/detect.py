"""Bond-graph configuration classifier.

Labels the world as liquid, chain(n), square, gripper or other from the
bond topology plus relative poses. Angular tests use a +/-10 degree
tolerance; anything ambiguous falls back to `other`.
"""

from __future__ import annotations

import math

import numpy as np

ANGLE_TOL_DEG = 10.0


def _angle_between(v1, v2) -> float:
    """Unsigned angle between two vectors, degrees."""
    n1 = np.linalg.norm(v1)
    n2 = np.linalg.norm(v2)
    if n1 == 0.0 or n2 == 0.0:
        return 0.0
    c = float(np.dot(v1, v2) / (n1 * n2))
    return math.degrees(math.acos(max(-1.0, min(1.0, c))))


def detect_configuration(world) -> str:
    """Classify the current world configuration."""
    modules = world.modules
    n = len(modules)
    edges = sorted(world.bonds)
    if not edges:
        return "liquid"

    in_component = set()
    for i, j in edges:
        in_component.add(i)
        in_component.add(j)
    if len(in_component) != n or not world.fully_connected():
        return "other"

    degrees = {m.id: len(m.bonds) for m in modules}
    n_edges = len(edges)

    if n_edges == n - 1:  # tree; a path iff max degree 2
        ends = [mid for mid, d in degrees.items() if d == 1]
        if len(ends) != 2 or any(d > 2 for d in degrees.values()):
            return "other"
        # walk the path from one end
        order = [ends[0]]
        prev = None
        while len(order) < n:
            nxt = [b for b in modules[order[-1]].bonds if b != prev]
            prev = order[-1]
            order.append(nxt[0])
        vecs = [
            modules[order[k + 1]].pos - modules[order[k]].pos for k in range(n - 1)
        ]
        if n == 2:
            return "chain(2)"
        corner_angles = [_angle_between(vecs[k], vecs[k + 1]) for k in range(n - 2)]
        if all(a <= ANGLE_TOL_DEG for a in corner_angles):
            return f"chain({n})"
        if n == 3 and abs(corner_angles[0] - 90.0) <= ANGLE_TOL_DEG:
            return "gripper"
        return "other"

    if n_edges == n == 4 and all(d == 2 for d in degrees.values()):
        # 4-cycle: square when every corner is a right angle
        for m in modules:
            nb = sorted(m.bonds)
            v1 = modules[nb[0]].pos - m.pos
            v2 = modules[nb[1]].pos - m.pos
            if abs(_angle_between(v1, v2) - 90.0) > ANGLE_TOL_DEG:
                return "other"
        return "square"

    return "other"
