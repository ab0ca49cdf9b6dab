"""Batch experiment runner and quantitative metrics.

Covers the displacement statistics (Euclidean / path-summed Manhattan /
per-axis), assembly time versus initial separation, reconfiguration
success rates and completion times, and pairwise significance testing
(Tukey HSD on the studentized range, Welch t-test for two conditions).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .coils import DEFAULT_SYSTEM
from .errors import ScenarioError
from .planning import COMPASS
from .sim import Engine, SimConfig, gait_cycle
from .sim import sequences as seqs

RECORD_VERSION = 1


@dataclass
class TrialRecord:
    """One trial's metrics; all lengths in millimeters, times in seconds."""

    scenario: str
    condition: str
    seed: int
    euclidean_mm: float = 0.0
    manhattan_mm: float = 0.0
    endpoint_l1_mm: float = 0.0
    x_mm: float = 0.0
    y_mm: float = 0.0
    assembly_time_s: float | None = None
    success: bool = True
    completion_time_s: float | None = None
    separation_mm: float | None = None
    degenerate: bool = False

    def to_dict(self) -> dict:
        out = {"record_version": RECORD_VERSION}
        for k, v in self.__dict__.items():
            out[k] = v
        return out


@dataclass
class ConditionSummary:
    condition: str
    n: int
    mean: float
    std: float
    success_rate: float
    mean_completion_s: float | None = None


@dataclass
class ExperimentSummary:
    scenario: str
    conditions: list[ConditionSummary]
    p_values: dict = field(default_factory=dict)  # "a|b" -> p

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "conditions": [c.__dict__ for c in self.conditions],
            "p_values": self.p_values,
        }


# -- displacement metrics ------------------------------------------------------


def displacement_metrics(trajectory, axis=(1.0, 0.0)):
    """(euclidean, manhattan, x, y) displacement of a position trajectory, mm.

    Manhattan is path-summed (|dx| + |dy| over consecutive samples) so
    non-straight paths score higher; x/y are the endpoint displacement
    components along and orthogonal to the commanded axis. A single-sample
    trajectory returns zeros with the degenerate flag.
    """
    pts = np.asarray(trajectory, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("trajectory must be (n, 2)")
    if pts.shape[0] < 2:
        return {"euclidean_mm": 0.0, "manhattan_mm": 0.0, "endpoint_l1_mm": 0.0,
                "x_mm": 0.0, "y_mm": 0.0, "degenerate": True}
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    perp = np.array([-axis[1], axis[0]])
    delta = pts[-1] - pts[0]
    diffs = np.diff(pts, axis=0)
    return {
        "euclidean_mm": float(np.linalg.norm(delta)) * 1e3,
        "manhattan_mm": float(np.sum(np.abs(diffs))) * 1e3,
        "endpoint_l1_mm": float(np.sum(np.abs(delta))) * 1e3,
        "x_mm": abs(float(np.dot(delta, axis))) * 1e3,
        "y_mm": abs(float(np.dot(delta, perp))) * 1e3,
        "degenerate": False,
    }


# -- significance tests ---------------------------------------------------------


def tukey_hsd(samples: dict[str, np.ndarray]) -> dict[str, float]:
    """All-pairs Tukey HSD p-values over named samples.

    Uses the studentized range distribution with the pooled within-group
    variance; two groups reduce to the classic q statistic. Degenerate
    zero-variance cases return p = 1 for equal means and p = 0 otherwise.
    """
    names = sorted(samples)
    groups = [np.asarray(samples[n], dtype=float) for n in names]
    if any(len(g) < 2 for g in groups):
        raise ScenarioError("each condition needs at least 2 trials")
    k = len(groups)
    n_total = sum(len(g) for g in groups)
    df = n_total - k
    means = [float(np.mean(g)) for g in groups]
    ssw = sum(float(np.sum((g - m) ** 2)) for g, m in zip(groups, means))
    out = {}
    for a in range(k):
        for b in range(a + 1, k):
            key = f"{names[a]}|{names[b]}"
            if ssw == 0.0:
                out[key] = 1.0 if means[a] == means[b] else 0.0
                continue
            msw = ssw / df
            se = math.sqrt(msw / 2.0 * (1.0 / len(groups[a]) + 1.0 / len(groups[b])))
            q = abs(means[a] - means[b]) / se
            out[key] = float(np.clip(stats.studentized_range.sf(q, k, df), 0.0, 1.0))
    return out


def compare_conditions(a, b) -> float:
    """p-value for two samples: Tukey HSD (k = 2 studentized range)."""
    return tukey_hsd({"a": np.asarray(a), "b": np.asarray(b)})["a|b"]


def welch_t_test(a, b) -> float:
    """Two-sided Welch t-test fallback, from the published formulas."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    va, vb = np.var(a, ddof=1), np.var(b, ddof=1)
    na, nb = len(a), len(b)
    if va == 0.0 and vb == 0.0:
        return 1.0 if np.mean(a) == np.mean(b) else 0.0
    se2 = va / na + vb / nb
    t = (np.mean(a) - np.mean(b)) / math.sqrt(se2)
    df = se2**2 / ((va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1))
    return float(2.0 * stats.t.sf(abs(t), df))


# -- experiment scenarios ---------------------------------------------------------


def run_gait_trial(mtype: str, mode: str, cycles: int, seed: int,
                   cfg: SimConfig | None = None, direction: int = 0) -> TrialRecord:
    """One n-cycle walk of a lone module; returns its displacement metrics."""
    cfg = cfg or SimConfig()
    rng = np.random.default_rng(seed)
    world = seqs.single_module_world(mtype, (0.0, 0.0))
    module = world.modules[0]
    traj = [module.pos.copy()]
    for _ in range(cycles):
        gait_cycle(module, direction, mode, cfg, rng)
        traj.append(module.pos.copy())
    axis = np.asarray(COMPASS[direction], dtype=float)
    metrics = displacement_metrics(traj, axis=axis)
    rec = TrialRecord(scenario="gait", condition=f"{mtype}:{mode}", seed=seed)
    for key in ("euclidean_mm", "manhattan_mm", "endpoint_l1_mm", "x_mm", "y_mm",
                "degenerate"):
        setattr(rec, key, metrics[key])
    return rec


def run_assembly_trial(separation: float, seed: int, assist_field: float = 1.5e-3,
                       timeout: float = 120.0, cfg: SimConfig | None = None) -> TrialRecord:
    """Two free modules released `separation` apart; measures bond time."""
    cfg = cfg or SimConfig(seed=seed)
    world = seqs.pair_world(separation, moments="rest")
    engine = Engine(world, cfg)
    cmds, _, target = seqs.assembly_sequence(engine.coils, assist_field, timeout)
    _, events = engine.run_sequence(cmds, duration=timeout, target_label=target)
    bond_times = [e.time for e in events if e.kind == "bond_formed"]
    rec = TrialRecord(
        scenario="assembly", condition=f"{assist_field * 1e3:.2f}mT", seed=seed,
        separation_mm=separation * 1e3,
    )
    rec.success = bool(bond_times)
    rec.assembly_time_s = bond_times[0] if bond_times else None
    rec.completion_time_s = rec.assembly_time_s
    return rec


def run_reconfiguration_trial(kind: str, seed: int, timeout: float = 30.0,
                              pose_jitter: float = 0.25e-3,
                              cfg: SimConfig | None = None) -> TrialRecord:
    """One chain_to_gripper / chain_to_square attempt with jittered poses.

    Success means the detector reports the target label within the timeout.
    """
    cfg = cfg or SimConfig(seed=seed)
    rng = np.random.default_rng(seed)
    if kind == "chain_to_gripper":
        world = seqs.gripper_chain_world()
        cmds, duration, target = seqs.chain_to_gripper_sequence(DEFAULT_SYSTEM)
    elif kind == "chain_to_square":
        world = seqs.two_chain_world()
        cmds, duration, target = seqs.chain_to_square_sequence(DEFAULT_SYSTEM)
    else:
        raise ScenarioError(f"unknown reconfiguration kind {kind!r}")
    if pose_jitter > 0.0:
        for m in world.modules:
            m.pos += rng.normal(0.0, pose_jitter, 2)
    engine = Engine(world, cfg)
    duration = min(duration, timeout)
    _, events = engine.run_sequence(cmds, duration=duration, target_label=target)
    done = [e.time for e in events if e.kind == "reconfiguration_complete"]
    rec = TrialRecord(scenario="reconfiguration", condition=kind, seed=seed)
    rec.success = bool(done)
    rec.completion_time_s = done[0] if done else None
    return rec


def run_experiment(spec: dict) -> tuple[ExperimentSummary, list[TrialRecord]]:
    """Run a declarative experiment spec; deterministic given its seed.

    spec keys: scenario (gait | assembly | reconfiguration), trials,
    seed, plus scenario-specific settings (conditions, cycles,
    separations_mm, kinds, assist_field_mT, pose_jitter_mm, timeout_s).
    """
    scenario = spec.get("scenario")
    trials = int(spec.get("trials", 20))
    base_seed = int(spec.get("seed", 0))
    if trials < 2:
        raise ScenarioError("need at least 2 trials per condition")
    records: list[TrialRecord] = []

    if scenario == "gait":
        cycles = int(spec.get("cycles", 10))
        conditions = spec.get(
            "conditions", ["fixed:H", "fixed:HM", "free:H", "free:HM"]
        )
        cfg = SimConfig()
        for cond in conditions:
            mtype, mode = cond.split(":")
            dirs = (0, 2, 4, 6)  # rotate through the cardinals
            for t in range(trials):
                records.append(
                    run_gait_trial(mtype, mode, cycles, base_seed + t, cfg,
                                   direction=dirs[t % 4])
                )
        value = "euclidean_mm"
    elif scenario == "assembly":
        separations = [s * 1e-3 for s in spec.get("separations_mm",
                                                  [3.5, 4.5, 5.5, 6.5])]
        assist = spec.get("assist_field_mT", 1.5) * 1e-3
        timeout = float(spec.get("timeout_s", 120.0))
        for sep in separations:
            for t in range(trials):
                rec = run_assembly_trial(sep, base_seed + t, assist, timeout)
                rec.condition = f"{sep * 1e3:.1f}mm"
                records.append(rec)
        value = "assembly_time_s"
    elif scenario == "reconfiguration":
        kinds = spec.get("kinds", ["chain_to_gripper", "chain_to_square"])
        jitter = spec.get("pose_jitter_mm", 0.25) * 1e-3
        timeout = float(spec.get("timeout_s", 30.0))
        for kind in kinds:
            for t in range(trials):
                records.append(
                    run_reconfiguration_trial(kind, base_seed + t, timeout, jitter)
                )
        value = "completion_time_s"
    else:
        raise ScenarioError(f"unknown experiment scenario {scenario!r}")

    return summarize(scenario, records, value), records


def summarize(scenario: str, records: list[TrialRecord], value_key: str) -> ExperimentSummary:
    """Per-condition means/stds/success rates plus all-pairs Tukey p-values."""
    by_cond: dict[str, list[TrialRecord]] = {}
    for rec in records:
        by_cond.setdefault(rec.condition, []).append(rec)
    conditions = []
    samples = {}
    for cond in sorted(by_cond):
        recs = by_cond[cond]
        values = np.array(
            [getattr(r, value_key) for r in recs if getattr(r, value_key) is not None],
            dtype=float,
        )
        comp = [r.completion_time_s for r in recs if r.completion_time_s is not None]
        conditions.append(
            ConditionSummary(
                condition=cond,
                n=len(recs),
                mean=float(values.mean()) if values.size else math.nan,
                std=float(values.std(ddof=1)) if values.size > 1 else 0.0,
                success_rate=sum(r.success for r in recs) / len(recs),
                mean_completion_s=float(np.mean(comp)) if comp else None,
            )
        )
        if values.size >= 2:
            samples[cond] = values
    p_values = tukey_hsd(samples) if len(samples) >= 2 else {}
    return ExperimentSummary(scenario=scenario, conditions=conditions, p_values=p_values)


def records_to_jsonl(records: list[TrialRecord]) -> str:
    return "\n".join(json.dumps(r.to_dict(), sort_keys=True) for r in records) + "\n"


def summary_table(summary: ExperimentSummary) -> str:
    """Aligned text table for terminal output."""
    lines = [f"scenario: {summary.scenario}"]
    header = f"{'condition':<20} {'n':>4} {'mean':>10} {'std':>10} {'success':>8} {'t_done':>8}"
    lines.append(header)
    lines.append("-" * len(header))
    for c in summary.conditions:
        done = f"{c.mean_completion_s:.2f}" if c.mean_completion_s is not None else "-"
        mean = f"{c.mean:.3f}" if not math.isnan(c.mean) else "-"
        lines.append(
            f"{c.condition:<20} {c.n:>4} {mean:>10} {c.std:>10.3f} "
            f"{c.success_rate:>8.2f} {done:>8}"
        )
    if summary.p_values:
        lines.append("pairwise Tukey HSD p-values:")
        for key in sorted(summary.p_values):
            lines.append(f"  {key}: {summary.p_values[key]:.4f}")
    return "\n".join(lines)
