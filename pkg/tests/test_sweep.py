import numpy as np
import pytest

from kelsim.config import parse_config
from kelsim.core import State, make_grid
from kelsim.diagnostics import DiagnosticsRecord
from kelsim.integrator import RunOutcome, Verdict
from kelsim.sweep import (
    EvaluationError,
    build_sweep_spec,
    classify_empirical,
    run_sweep,
    write_phase_csv,
)
from kelsim.theory import RegimeStatus


def fake_outcome(linfs, verdict=Verdict.COMPLETED_BOUNDED):
    recs = [DiagnosticsRecord(t=float(i), dt=0.1, mass=1.0, lp_norms={2.0: 1.0},
                              linf_u=x, min_u=0.0, l2_v=0.0)
            for i, x in enumerate(linfs)]
    g = make_grid(1, [4], [1.0])
    st = State(u=np.zeros(4), v=np.zeros(4), t=float(len(linfs) - 1))
    return RunOutcome(verdict=verdict, final_state=st, records=recs)


class TestClassifyEmpirical:
    def test_equilibrium_plateau_is_bounded(self):
        out = fake_outcome([1.0] * 20)
        res = classify_empirical(out)
        assert res.status == "bounded" and not res.growing

    def test_blowup_verdict_passthrough(self):
        out = fake_outcome([1.0] * 3, verdict=Verdict.NUMERICAL_BLOWUP)
        assert classify_empirical(out).status == "blowup"

    def test_abort_verdict_passthrough(self):
        out = fake_outcome([1.0] * 3, verdict=Verdict.ABORTED)
        assert classify_empirical(out).status == "aborted"

    def test_slow_growth_flagged(self):
        # 4% growth per record compounds well past 1.05 between windows
        linfs = [1.04 ** i for i in range(24)]
        res = classify_empirical(fake_outcome(linfs))
        assert res.status == "bounded" and res.growing

    def test_mild_tail_growth_within_tolerance_not_flagged(self):
        linfs = [1.0] * 20 + [1.02] * 4
        res = classify_empirical(fake_outcome(linfs))
        assert res.status == "bounded" and not res.growing

    def test_too_few_records_rejected(self):
        with pytest.raises(EvaluationError):
            classify_empirical(fake_outcome([1.0] * 5))

    def test_decaying_transient_is_bounded(self):
        linfs = list(np.linspace(5.0, 1.0, 30))
        res = classify_empirical(fake_outcome(linfs))
        assert res.status == "bounded" and not res.growing


SWEEP_CFG = """\
N = 2
chi = 1.0
mu = 0
m = 2.0
nx = 12
ny = 12
u0_kind = noise
u0_seed = 3
u0_amplitude = 0.8
v0_kind = constant
v0_value = 0.2
t_end = 0.3
safety = 0.5
record_every = 0.01
sweep_axis1 = m
sweep_values1 = 1.25 1.5 2.0
workers = 1
"""


class TestRunSweep:
    def test_single_point_sweep(self, tmp_path):
        cfg = parse_config(SWEEP_CFG.replace("sweep_values1 = 1.25 1.5 2.0",
                                             "sweep_values1 = 2.0"))
        cells = run_sweep(build_sweep_spec(cfg), tmp_path / "phase.csv")
        assert len(cells) == 1
        text = (tmp_path / "phase.csv").read_text().strip().split("\n")
        assert len(text) == 2  # header + one data row

    def test_supercritical_lattice_all_bounded_case_one(self, tmp_path):
        cfg = parse_config(SWEEP_CFG)
        cells = run_sweep(build_sweep_spec(cfg), tmp_path / "phase.csv")
        assert len(cells) == 3
        for c in cells:
            assert c.theoretical.status is RegimeStatus.BOUNDED_CASE_I
            assert c.empirical == "bounded"
            assert c.agree

    def test_lattice_order_row_major(self, tmp_path):
        text = SWEEP_CFG + "sweep_axis2 = chi\nsweep_values2 = 0.5 1.0\n"
        cells = run_sweep(build_sweep_spec(parse_config(text)))
        pairs = [(c.axis1_value, c.axis2_value) for c in cells]
        assert pairs == [(1.25, 0.5), (1.25, 1.0), (1.5, 0.5), (1.5, 1.0),
                        (2.0, 0.5), (2.0, 1.0)]

    def test_worker_count_does_not_change_bytes(self, tmp_path):
        from dataclasses import replace

        cfg = parse_config(SWEEP_CFG.replace("workers = 1", "workers = 2"))
        spec = build_sweep_spec(cfg)
        run_sweep(spec, tmp_path / "p2.csv")
        run_sweep(replace(spec, workers=1), tmp_path / "p1.csv")
        assert (tmp_path / "p1.csv").read_bytes() == (tmp_path / "p2.csv").read_bytes()

    def test_aborted_cell_recorded_not_fatal(self, tmp_path):
        # safety = 1 with rough noise and strong chemotaxis undershoots
        # positivity on the first step
        text = """\
N = 2
chi = 12.0
mu = 0
m = 1.0
c_d = 0.05
nx = 12
ny = 12
u0_kind = noise
u0_seed = 0
u0_cutoff = 0
v0_kind = noise
v0_seed = 100
v0_cutoff = 0
t_end = 0.5
safety = 1.0
record_every = 0.01
sweep_axis1 = chi
sweep_values1 = 12.0
"""
        cells = run_sweep(build_sweep_spec(parse_config(text)), tmp_path / "a.csv")
        assert len(cells) == 1
        assert cells[0].empirical == "aborted"
        assert cells[0].agree  # aborted is not a theory contradiction

    def test_agree_false_only_for_predicted_bounded_blowup(self, tmp_path):
        # supercritical concentrated mass with m = 1 at N = 2 blows up and
        # the classifier is silent there: NotCovered cells never disagree
        text = """\
N = 2
chi = 1.0
mu = 0
m = 1.0
c_d = 0.2
nx = 24
ny = 24
u0_kind = gaussian
u0_amplitude = 1300.0
u0_width = 0.12
v0_kind = constant
v0_value = 0.0
t_end = 4.0
safety = 0.5
blowup_factor = 20.0
record_every = 0.05
sweep_axis1 = m
sweep_values1 = 1.0
"""
        cells = run_sweep(build_sweep_spec(parse_config(text)), tmp_path / "b.csv")
        assert cells[0].empirical == "blowup"
        assert cells[0].theoretical.status is RegimeStatus.NOT_COVERED
        assert cells[0].agree

    def test_phase_csv_columns_and_round_trip(self, tmp_path):
        cfg = parse_config(SWEEP_CFG)
        spec = build_sweep_spec(cfg)
        cells = run_sweep(spec)
        path = write_phase_csv(cells, spec, tmp_path / "c.csv")
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "m_exp,mu,empirical,theoretical,agree,t_final,max_linf"
        for line, cell in zip(lines[1:], cells):
            fields = line.split(",")
            assert float(fields[0]) == cell.axis1_value
            assert float(fields[1]) == cell.axis2_value
            assert fields[2] == cell.empirical
            assert fields[3] == cell.theoretical.status.value
            assert fields[4] == ("true" if cell.agree else "false")
            assert float(fields[5]) == cell.t_final
            assert float(fields[6]) == cell.max_linf

    def test_env_var_caps_workers(self, monkeypatch):
        from kelsim.sweep import _worker_count
        monkeypatch.setenv("KELSIM_THREADS", "2")
        assert _worker_count(8) == 2
        monkeypatch.setenv("KELSIM_THREADS", "junk")
        assert _worker_count(8) == 8
        monkeypatch.delenv("KELSIM_THREADS")
        assert _worker_count(3) == 3
