"""Command-line interface.

Subcommands:
  simulate CONFIG   run one trajectory, emit a timeseries CSV (and snapshots)
  sweep CONFIG      run the configured parameter sweep, emit phase.csv
  theory CONFIG     print the closed-form thresholds for the configuration
  check CONFIG      run quick invariant self-tests on the configuration
  estimate CONFIG   run the constant estimators

Exit codes: 0 success, 2 configuration error, 3 numeric abort or failed
self-check. The KELSIM_THREADS environment variable caps sweep workers.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, SimulationConfig, parse_config
from .core import ConfigurationError, State, make_initial
from .diagnostics import GnCorpus, estimate_cgn, estimate_lambda0, gn_ratio, mass
from .integrator import Verdict, run
from .output import emit_snapshot, emit_timeseries
from .sweep import build_sweep_spec, run_sweep
from .theory import (DegenerateCaseError, cd_threshold, classify_regime,
                     critical_exponent, find_p0, lemma_min, PreconditionError)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _load_config(path: str) -> SimulationConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"no such config file: {path}")
    return parse_config(p.read_text())


def _initial_state(cfg: SimulationConfig) -> State:
    return State(u=make_initial(cfg.grid, cfg.u0), v=make_initial(cfg.grid, cfg.v0))


def _u0_l1(cfg: SimulationConfig) -> float:
    if cfg.u0_l1_override is not None:
        return cfg.u0_l1_override
    return mass(make_initial(cfg.grid, cfg.u0), cfg.grid)


def _cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    outcome = run(_initial_state(cfg), cfg.params, cfg.grid, cfg.control,
                  record_every=cfg.record_every, lp_track=cfg.lp_track)
    path = emit_timeseries(outcome, args.timeseries)
    print(f"verdict: {outcome.verdict.value}")
    if outcome.t_detect is not None:
        print(f"detected at t = {outcome.t_detect}")
    if outcome.reason:
        print(f"reason: {outcome.reason}")
    print(f"t_final = {outcome.final_state.t}  steps = {outcome.final_state.step}")
    print(f"timeseries: {path}")
    if args.snapshot:
        for f in emit_snapshot(outcome.final_state.u, cfg.grid, args.snapshot):
            print(f"snapshot: {f}")
        if cfg.grid.dim == 1:
            print("snapshot note: 1D grid, CSV only (PGM skipped)")
    return EXIT_NUMERIC if outcome.verdict is Verdict.ABORTED else EXIT_OK


def _cmd_sweep(args) -> int:
    from dataclasses import replace

    cfg = _load_config(args.config)
    spec = build_sweep_spec(cfg)
    if args.workers is not None:
        spec = replace(spec, workers=args.workers)
    cells = run_sweep(spec, csv_path=args.phase)
    n_disagree = sum(1 for c in cells if not c.agree)
    for c in cells:
        print(f"{spec.axis1_name}={c.axis1_value:g} {spec.axis2_name}={c.axis2_value:g}"
              f" empirical={c.empirical} theoretical={c.theoretical.status.value}"
              f" agree={'true' if c.agree else 'false'}")
    print(f"phase diagram: {args.phase} ({len(cells)} cells, "
          f"{n_disagree} disagreements)")
    return EXIT_OK


def _cmd_theory(args) -> int:
    cfg = _load_config(args.config)
    params = cfg.params
    u0_l1 = _u0_l1(cfg)
    ce = critical_exponent(params)
    if ce.unconstrained:
        print("critical exponent m*: unconstrained (every m qualifies)")
    else:
        print(f"critical exponent m*: {ce.value!r}")
    try:
        thr = cd_threshold(params, u0_l1)
        print(f"c_d threshold (|u0|_L1 = {u0_l1:g}): {thr!r}")
    except DegenerateCaseError as exc:
        print(f"c_d threshold: degenerate ({exc})")
        thr = None
    verdict = classify_regime(params, u0_l1)
    print(f"regime: {verdict.status.value} -- {verdict.detail}")
    if thr is not None:
        try:
            p0 = find_p0(params.c_d, params.c_gn, u0_l1, params.dim,
                         params.lambda0, params.chi)
            print(f"integrability exponent p0: {p0!r}")
        except PreconditionError as exc:
            print(f"integrability exponent p0: not available ({exc})")
    for p in (2.0, 3.0):
        y_star, minimum = lemma_min(p, params.chi, params.lambda0)
        print(f"scalar minimum at p = {p:g}: y* = {y_star!r}, min = {minimum!r}")
    return EXIT_OK


def _cmd_check(args) -> int:
    cfg = _load_config(args.config)
    ok = True
    for name, fn in _self_checks(cfg):
        try:
            fn()
            print(f"PASS {name}")
        except Exception as exc:  # report and keep checking
            ok = False
            print(f"FAIL {name}: {exc}")
    return EXIT_OK if ok else EXIT_NUMERIC


def _self_checks(cfg: SimulationConfig):
    from dataclasses import replace

    from .integrator import StepControl
    from .operators import assemble_fluxes, flux_divergence

    def conservation():
        rng = np.random.Generator(np.random.Philox(99))
        u = rng.random(cfg.grid.shape) + 0.1
        v = rng.random(cfg.grid.shape)
        div = flux_divergence(assemble_fluxes(State(u=u, v=v), cfg.params, cfg.grid),
                              cfg.grid)
        total = abs(float(np.sum(div)) * cfg.grid.cell_volume)
        if total > 1e-12:
            raise AssertionError(f"flux divergence total {total} exceeds 1e-12")

    def initial_determinism():
        a = make_initial(cfg.grid, cfg.u0)
        b = make_initial(cfg.grid, cfg.u0)
        if not np.array_equal(a, b):
            raise AssertionError("initial data not reproducible")

    def lemma_consistency():
        for p in (1.5, 2.0, 5.0):
            lemma_min(p, cfg.params.chi, cfg.params.lambda0)

    def gn_scale_invariance():
        f = make_initial(cfg.grid, cfg.u0)
        if float(np.max(f)) == 0.0:
            f = f + 1.0
        r1 = gn_ratio(f, 2.0, 1.0, cfg.grid)
        r2 = gn_ratio(3.0 * f, 2.0, 1.0, cfg.grid)
        if not math.isclose(r1, r2, rel_tol=1e-12):
            raise AssertionError(f"gn_ratio not scale invariant: {r1} vs {r2}")

    def short_run_determinism():
        control = StepControl(t_end=min(cfg.control.t_end, 20 * cfg.control.dt_max),
                              safety=cfg.control.safety, dt_min=cfg.control.dt_min,
                              dt_max=cfg.control.dt_max,
                              blowup_factor=cfg.control.blowup_factor)
        outs = [run(_initial_state(cfg), cfg.params, cfg.grid, control,
                    record_every=control.t_end / 4) for _ in range(2)]
        same = (np.array_equal(outs[0].final_state.u, outs[1].final_state.u)
                and np.array_equal(outs[0].final_state.v, outs[1].final_state.v))
        if not same:
            raise AssertionError("re-run produced different trajectory")

    return [("flux-conservation", conservation),
            ("initial-data-determinism", initial_determinism),
            ("scalar-minimum-consistency", lemma_consistency),
            ("gn-ratio-scale-invariance", gn_scale_invariance),
            ("short-run-determinism", short_run_determinism)]


def _cmd_estimate(args) -> int:
    cfg = _load_config(args.config)
    est = cfg.est
    corpus = GnCorpus(seed=est.seed, constants=(0.5, 1.0, 2.0),
                      n_bumps=est.bumps, n_noise=est.noise_fields,
                      n_spikes=est.spikes)
    cgn = estimate_cgn(corpus, est.p, est.theta, cfg.grid)
    print(f"C_GN lower-bound estimate (p={est.p:g}, theta={est.theta:g}): {cgn!r}")
    lam = estimate_lambda0(est.gamma, cfg.grid, est.trials, est.seed, est.horizon)
    print(f"lambda0 lower-bound estimate (gamma={est.gamma:g}, "
          f"trials={est.trials}): {lam!r}")
    print("note: both are lower bounds; no finite corpus certifies an upper bound")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kelsim",
        description="Finite-volume laboratory for the quasilinear "
                    "Keller-Segel system with logistic source")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one trajectory")
    p_sim.add_argument("config")
    p_sim.add_argument("--timeseries", default="timeseries.csv",
                       help="output CSV path")
    p_sim.add_argument("--snapshot", default=None,
                       help="base path for final-state snapshot (PGM+CSV)")
    p_sim.set_defaults(fn=_cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="run the configured parameter sweep")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--phase", default="phase.csv", help="output CSV path")
    p_sweep.add_argument("--workers", type=int, default=None,
                         help="override configured worker count")
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_theory = sub.add_parser("theory", help="print closed-form thresholds")
    p_theory.add_argument("config")
    p_theory.set_defaults(fn=_cmd_theory)

    p_check = sub.add_parser("check", help="run invariant self-tests")
    p_check.add_argument("config")
    p_check.set_defaults(fn=_cmd_check)

    p_est = sub.add_parser("estimate", help="run the constant estimators")
    p_est.add_argument("config")
    p_est.set_defaults(fn=_cmd_estimate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, ConfigurationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # numeric / runtime failures
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
