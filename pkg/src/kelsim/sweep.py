"""Parameter sweeps: empirical boundedness classification over a parameter
lattice, compared with the closed-form regime classifier.

Each lattice point runs one independent simulation. Results are merged in
lattice order (axis1 outer, axis2 inner), so the emitted ``phase.csv`` is
byte-identical for any worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .config import ConfigError, SimulationConfig, with_param
from .core import State, make_initial
from .diagnostics import mass
from .integrator import RunOutcome, Verdict, run
from .output import fmt
from .theory import RegimeVerdict, classify_regime

WORKER_ENV = "KELSIM_THREADS"


class EvaluationError(ValueError):
    """Outcome unsuitable for empirical classification."""


@dataclass(frozen=True)
class EmpiricalResult:
    status: str  # "bounded" | "blowup" | "aborted"
    growing: bool = False


def classify_empirical(outcome: RunOutcome, plateau_window: float = 0.25) -> EmpiricalResult:
    """Numerical proxy for global boundedness.

    Blowup when the detector fired, aborted on numeric corruption;
    otherwise the run counts as bounded, flagged as still growing when the
    sup norm over the final plateau window exceeds 1.05 times its maximum
    over the identically sized preceding window.
    """
    if outcome.verdict is Verdict.NUMERICAL_BLOWUP:
        return EmpiricalResult("blowup")
    if outcome.verdict is Verdict.ABORTED:
        return EmpiricalResult("aborted")
    recs = outcome.records
    if len(recs) < 10:
        raise EvaluationError(
            f"need at least 10 records to judge a plateau, got {len(recs)}")
    if not (0.0 < plateau_window <= 0.5):
        raise EvaluationError(f"plateau_window must be in (0, 0.5], got {plateau_window}")
    k = max(2, int(round(plateau_window * len(recs))))
    last = max(r.linf_u for r in recs[-k:])
    prev = max(r.linf_u for r in recs[-2 * k:-k])
    growing = last > 1.05 * prev
    return EmpiricalResult("bounded", growing=growing)


@dataclass(frozen=True)
class SweepSpec:
    axis1_name: str
    axis1_values: tuple[float, ...]
    axis2_name: str
    axis2_values: tuple[float, ...]
    base: SimulationConfig
    workers: int = 1


def build_sweep_spec(cfg: SimulationConfig) -> SweepSpec:
    if cfg.sweep is None:
        raise ConfigError("configuration declares no sweep axes")
    s = cfg.sweep
    return SweepSpec(axis1_name=s.axis1_name, axis1_values=s.axis1_values,
                     axis2_name=s.axis2_name, axis2_values=s.axis2_values,
                     base=cfg, workers=s.workers)


@dataclass(frozen=True)
class PhaseCell:
    axis1_value: float
    axis2_value: float
    empirical: str
    growing: bool
    theoretical: RegimeVerdict
    agree: bool
    t_final: float
    max_linf: float


def _worker_count(requested: int) -> int:
    cap = os.environ.get(WORKER_ENV)
    if cap is not None:
        try:
            requested = min(requested, max(1, int(cap)))
        except ValueError:
            pass
    return max(1, requested)


def _run_cell(task: tuple[int, SweepSpec, float, float]):
    idx, spec, v1, v2 = task
    cfg = spec.base
    params = with_param(cfg.params, spec.axis1_name, v1)
    params = with_param(params, spec.axis2_name, v2)
    grid = cfg.grid
    u0 = make_initial(grid, cfg.u0)
    v0 = make_initial(grid, cfg.v0)
    u0_l1 = cfg.u0_l1_override
    if u0_l1 is None:
        u0_l1 = mass(u0, grid)
    theoretical = classify_regime(params, u0_l1)
    outcome = run(State(u=u0, v=v0), params, grid, cfg.control,
                  record_every=cfg.record_every, lp_track=cfg.lp_track)
    empirical = classify_empirical(outcome, cfg.plateau_window)
    max_linf = max(r.linf_u for r in outcome.records)
    agree = not (theoretical.bounded and empirical.status == "blowup")
    cell = PhaseCell(axis1_value=v1, axis2_value=v2,
                     empirical=empirical.status, growing=empirical.growing,
                     theoretical=theoretical, agree=agree,
                     t_final=outcome.final_state.t, max_linf=max_linf)
    return idx, cell


def run_sweep(spec: SweepSpec, csv_path: str | Path | None = None) -> list[PhaseCell]:
    """Run one simulation per lattice point; optionally write phase.csv.

    Cells come back in lattice order regardless of worker scheduling, and
    individual aborted runs are recorded, never fatal to the sweep.
    """
    tasks = []
    idx = 0
    for v1 in spec.axis1_values:
        for v2 in spec.axis2_values:
            tasks.append((idx, spec, v1, v2))
            idx += 1
    workers = _worker_count(spec.workers)
    results: list[PhaseCell | None] = [None] * len(tasks)
    if workers == 1 or len(tasks) == 1:
        for task in tasks:
            i, cell = _run_cell(task)
            results[i] = cell
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i, cell in pool.map(_run_cell, tasks):
                results[i] = cell
    cells = [c for c in results if c is not None]
    if csv_path is not None:
        write_phase_csv(cells, spec, csv_path)
    return cells


def write_phase_csv(cells: list[PhaseCell], spec: SweepSpec,
                    path: str | Path) -> Path:
    path = Path(path)
    lines = [f"{spec.axis1_name},{spec.axis2_name},empirical,theoretical,"
             "agree,t_final,max_linf"]
    for c in cells:
        lines.append(",".join([
            fmt(c.axis1_value), fmt(c.axis2_value), c.empirical,
            c.theoretical.status.value, "true" if c.agree else "false",
            fmt(c.t_final), fmt(c.max_linf)]))
    path.write_text("\n".join(lines) + "\n", newline="\n")
    return path
