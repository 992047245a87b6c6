import math

import numpy as np
import pytest

from kelsim.core import (
    ConfigurationError,
    InitialData,
    ModelParams,
    State,
    StateCorruptionError,
    make_grid,
    make_initial,
)
from kelsim.diagnostics import mass
from kelsim.integrator import StepControl, Verdict, run, stable_dt, step


def logistic_exact(u0, mu, t):
    return u0 / (u0 + (1.0 - u0) * math.exp(-mu * t))


class TestStepControl:
    def test_defaults(self):
        c = StepControl(t_end=1.0)
        assert c.safety == 0.25 and c.dt_min == 1e-12 and c.blowup_factor == 1e6

    @pytest.mark.parametrize("bad", [
        dict(t_end=0.0), dict(safety=0.0), dict(safety=1.5),
        dict(dt_min=0.2, dt_max=0.1), dict(blowup_factor=0.0),
    ])
    def test_invalid_rejected(self, bad):
        kwargs = dict(t_end=1.0)
        kwargs.update(bad)
        with pytest.raises(ConfigurationError):
            StepControl(**kwargs)


class TestStableDt:
    def test_hand_value_pure_diffusion(self):
        # u = v = 0, m = 1, c_d = 1, 1D, h = 0.1, safety = 0.25, mu = 0:
        # dt = 0.25 * min(h^2/2, h^2/2) = 0.00125
        g = make_grid(1, [10], [1.0])
        st_ = State(u=np.zeros(10), v=np.zeros(10))
        p = ModelParams(dim=1, chi=1.0, mu=0.0, c_d=1.0, m_exp=1.0)
        dt = stable_dt(st_, p, g, StepControl(t_end=1.0))
        assert dt == pytest.approx(0.00125, rel=1e-14)

    def test_advection_and_logistic_constraints_absent_when_inactive(self):
        g = make_grid(1, [10], [1.0])
        st_ = State(u=np.full(10, 100.0), v=np.full(10, 3.0))
        p = ModelParams(dim=1, chi=5.0, mu=0.0, c_d=1.0, m_exp=1.0)
        # constant v: no advective constraint; mu = 0: no logistic constraint
        dt = stable_dt(st_, p, g, StepControl(t_end=1.0))
        assert dt == pytest.approx(0.00125, rel=1e-14)

    def test_logistic_constraint_binds_for_stiff_source(self):
        g = make_grid(1, [10], [1.0])
        st_ = State(u=np.full(10, 50.0), v=np.zeros(10))
        mu = 1e4
        p = ModelParams(dim=1, chi=1.0, mu=mu, c_d=1.0, m_exp=1.0)
        dt = stable_dt(st_, p, g, StepControl(t_end=1.0))
        assert dt == pytest.approx(0.25 / (mu * (2.0 * 50.0 + 1.0)), rel=1e-12)

    def test_end_of_run_clamp(self):
        g = make_grid(1, [10], [1.0])
        st_ = State(u=np.zeros(10), v=np.zeros(10), t=0.9995)
        p = ModelParams(dim=1, chi=1.0, mu=0.0, c_d=1.0, m_exp=1.0)
        dt = stable_dt(st_, p, g, StepControl(t_end=1.0))
        assert dt == pytest.approx(1.0 - 0.9995, rel=1e-10)

    def test_dt_max_clamp(self):
        g = make_grid(1, [10], [10.0])  # h = 1, huge diffusive limit
        st_ = State(u=np.zeros(10), v=np.zeros(10))
        p = ModelParams(dim=1, chi=1.0, mu=0.0, c_d=1e-6, m_exp=1.0)
        dt = stable_dt(st_, p, g, StepControl(t_end=100.0, dt_max=0.05))
        assert dt == 0.05


class TestStep:
    def test_equilibrium_bitwise_fixed_point(self):
        g = make_grid(2, [8, 8], [1.0, 1.0])
        p = ModelParams(dim=2, chi=1.0, mu=2.0, c_d=1.0, m_exp=2.0)
        st_ = State(u=np.ones((8, 8)), v=np.ones((8, 8)))
        nxt = st_
        for _ in range(5):
            nxt = step(nxt, p, g, 1e-3)
        assert np.array_equal(nxt.u, st_.u)
        assert np.array_equal(nxt.v, st_.v)
        assert nxt.step == 5

    def test_metadata_advances(self):
        g = make_grid(1, [8], [1.0])
        p = ModelParams(dim=1, chi=1.0, mu=0.0, c_d=1.0, m_exp=1.0)
        st_ = State(u=np.full(8, 0.5), v=np.zeros(8))
        nxt = step(st_, p, g, 1e-4)
        assert nxt.t == pytest.approx(1e-4)
        assert nxt.step == 1 and nxt.last_dt == 1e-4

    def test_logistic_accuracy_small_dt(self):
        g = make_grid(1, [8], [1.0])
        mu = 1.0
        p = ModelParams(dim=1, chi=1.0, mu=mu, c_d=1.0, m_exp=1.0)
        st_ = State(u=np.full(8, 0.5), v=np.full(8, 0.5))
        dt = 1e-3
        for _ in range(1000):
            st_ = step(st_, p, g, dt)
        assert st_.u[0] == pytest.approx(logistic_exact(0.5, mu, 1.0), rel=2e-4)

    def test_mass_preserved_per_step(self):
        g = make_grid(2, [16, 16], [1.0, 1.0])
        p = ModelParams(dim=2, chi=1.0, mu=0.0, c_d=1.0, m_exp=2.0)
        u0 = make_initial(g, InitialData.filtered_noise(8, 1.0, 3))
        v0 = make_initial(g, InitialData.filtered_noise(9, 0.5, 3))
        st_ = State(u=u0, v=v0)
        m0 = mass(st_.u, g)
        ctl = StepControl(t_end=1.0)
        for _ in range(50):
            st_ = step(st_, p, g, stable_dt(st_, p, g, ctl))
        assert abs(mass(st_.u, g) - m0) / m0 <= 1e-13

    def test_wildly_unstable_dt_aborts(self):
        g = make_grid(1, [16], [1.0])
        p = ModelParams(dim=1, chi=8.0, mu=0.0, c_d=1.0, m_exp=1.0)
        u = make_initial(g, InitialData.filtered_noise(4, 1.0, 1))
        v = make_initial(g, InitialData.filtered_noise(5, 1.0, 0))
        st_ = State(u=u, v=v)
        with pytest.raises(StateCorruptionError):
            for _ in range(50):
                st_ = step(st_, p, g, 1.0)

    def test_rejects_nonpositive_dt(self):
        g = make_grid(1, [8], [1.0])
        p = ModelParams(dim=1, chi=1.0, mu=0.0, c_d=1.0, m_exp=1.0)
        with pytest.raises(ConfigurationError):
            step(State(u=np.zeros(8), v=np.zeros(8)), p, g, 0.0)


class TestRun:
    def test_equilibrium_completes_unchanged(self):
        g = make_grid(2, [8, 8], [1.0, 1.0])
        p = ModelParams(dim=2, chi=1.0, mu=1.0, c_d=1.0, m_exp=2.0)
        init = State(u=np.ones((8, 8)), v=np.ones((8, 8)))
        out = run(init, p, g, StepControl(t_end=10.0, dt_max=0.05),
                  record_every=1.0)
        assert out.verdict is Verdict.COMPLETED_BOUNDED
        assert out.final_state.t == 10.0
        assert np.allclose(out.final_state.u, 1.0, atol=1e-12)
        assert np.allclose(out.final_state.v, 1.0, atol=1e-12)

    def test_records_cadence_first_and_last(self):
        g = make_grid(1, [16], [1.0])
        p = ModelParams(dim=1, chi=1.0, mu=0.0, c_d=1.0, m_exp=1.0)
        init = State(u=np.full(16, 0.5), v=np.zeros(16))
        out = run(init, p, g, StepControl(t_end=1.0), record_every=0.25)
        ts = [r.t for r in out.records]
        assert ts[0] == 0.0 and ts[-1] == 1.0
        assert all(b > a for a, b in zip(ts, ts[1:]))
        assert len(ts) >= 5

    def test_bitwise_deterministic_rerun(self):
        g = make_grid(2, [12, 12], [1.0, 1.0])
        p = ModelParams(dim=2, chi=1.5, mu=0.3, c_d=0.8, m_exp=1.5)
        u0 = make_initial(g, InitialData.filtered_noise(21, 0.7, 3))
        v0 = make_initial(g, InitialData.filtered_noise(22, 0.4, 3))
        outs = [run(State(u=u0.copy(), v=v0.copy()), p, g,
                    StepControl(t_end=0.2, safety=0.5), record_every=0.05)
                for _ in range(2)]
        assert np.array_equal(outs[0].final_state.u, outs[1].final_state.u)
        assert np.array_equal(outs[0].final_state.v, outs[1].final_state.v)
        assert [r.mass for r in outs[0].records] == [r.mass for r in outs[1].records]

    def test_run_matches_manual_stepping_bitwise(self):
        g = make_grid(2, [10, 10], [1.0, 1.0])
        p = ModelParams(dim=2, chi=1.0, mu=0.5, c_d=1.0, m_exp=1.5)
        u0 = make_initial(g, InitialData.filtered_noise(31, 0.6, 2))
        v0 = make_initial(g, InitialData.filtered_noise(32, 0.3, 2))
        ctl = StepControl(t_end=0.05, safety=0.5)
        out = run(State(u=u0.copy(), v=v0.copy()), p, g, ctl, record_every=0.05)
        manual = State(u=u0.copy(), v=v0.copy())
        while ctl.t_end - manual.t > 1e-12 * ctl.t_end:
            manual = step(manual, p, g, stable_dt(manual, p, g, ctl))
        assert manual.step == out.final_state.step
        assert np.array_equal(manual.u, out.final_state.u)
        assert np.array_equal(manual.v, out.final_state.v)

    def test_mass_conserved_over_trajectory(self):
        g = make_grid(2, [24, 24], [1.0, 1.0])
        p = ModelParams(dim=2, chi=1.0, mu=0.0, c_d=1.0, m_exp=2.0)
        u0 = make_initial(g, InitialData.filtered_noise(41, 1.0, 4))
        v0 = make_initial(g, InitialData.filtered_noise(42, 0.5, 4))
        out = run(State(u=u0, v=v0), p, g, StepControl(t_end=1.0, safety=0.5),
                  record_every=0.1)
        assert out.verdict is Verdict.COMPLETED_BOUNDED
        m0 = out.records[0].mass
        assert all(abs(r.mass - m0) / m0 <= 1e-12 for r in out.records)

    def test_positivity_along_trajectory(self):
        g = make_grid(2, [16, 16], [1.0, 1.0])
        p = ModelParams(dim=2, chi=2.0, mu=0.0, c_d=0.5, m_exp=1.0)
        u0 = make_initial(g, InitialData.gaussian(2.0, 0.15))
        out = run(State(u=u0, v=np.zeros(g.shape)), p, g,
                  StepControl(t_end=0.5, safety=0.5), record_every=0.05)
        assert out.verdict is Verdict.COMPLETED_BOUNDED
        assert all(r.min_u >= -1e-10 for r in out.records)

    def test_mass_bounded_with_logistic_source(self):
        g = make_grid(2, [16, 16], [1.0, 1.0])
        p = ModelParams(dim=2, chi=1.0, mu=1.0, c_d=1.0, m_exp=2.0)
        u0 = make_initial(g, InitialData.filtered_noise(51, 1.0, 3))
        u0 = u0 * (3.0 * g.volume / mass(u0, g))  # mass(0) = 3 |Omega|
        out = run(State(u=u0, v=np.zeros(g.shape)), p, g,
                  StepControl(t_end=4.0, safety=0.5), record_every=0.2)
        bound = max(mass(u0, g), g.volume) * (1.0 + 1e-6)
        assert all(r.mass <= bound for r in out.records)
        # forward window integrals get filled in when mu > 0
        filled = [r.u2_window for r in out.records if r.u2_window is not None]
        assert filled and all(w >= 0.0 for w in filled)

    def test_dt_collapse_flags_blowup(self):
        g = make_grid(1, [16], [1.0])
        p = ModelParams(dim=1, chi=1.0, mu=0.0, c_d=1.0, m_exp=1.0)
        init = State(u=np.full(16, 0.5), v=np.zeros(16))
        # stability step ~ 1e-3 sits below this dt_min, so the collapse
        # branch fires immediately
        ctl = StepControl(t_end=1.0, dt_min=0.5e-2, dt_max=1e-1)
        out = run(init, p, g, ctl, record_every=0.25)
        assert out.verdict is Verdict.NUMERICAL_BLOWUP
        assert out.t_detect == 0.0

    def test_amplitude_detector_fires_on_chemotactic_collapse(self):
        # supercritical concentrated mass in the classical 2D system
        g = make_grid(2, [48, 48], [1.0, 1.0])
        chi = 1.0
        p = ModelParams(dim=2, chi=chi, mu=0.0, c_d=1.0, m_exp=1.0)
        u0 = make_initial(g, InitialData.gaussian(1.0, 0.25))
        u0 = u0 * (4.0 * 8.0 * math.pi / chi / mass(u0, g))
        ctl = StepControl(t_end=10.0, safety=0.5, blowup_factor=100.0)
        out = run(State(u=u0, v=np.zeros(g.shape)), p, g, ctl, record_every=0.05)
        assert out.verdict is Verdict.NUMERICAL_BLOWUP
        assert out.t_detect is not None and out.t_detect < 10.0
        assert out.reason and "sup u" in out.reason

    def test_subcritical_mass_stays_bounded(self):
        g = make_grid(2, [32, 32], [1.0, 1.0])
        chi = 1.0
        p = ModelParams(dim=2, chi=chi, mu=0.0, c_d=1.0, m_exp=1.0)
        u0 = make_initial(g, InitialData.gaussian(1.0, 0.25))
        u0 = u0 * (0.25 * 8.0 * math.pi / chi / mass(u0, g))
        ctl = StepControl(t_end=2.0, safety=0.5, blowup_factor=100.0)
        out = run(State(u=u0, v=np.zeros(g.shape)), p, g, ctl, record_every=0.1)
        assert out.verdict is Verdict.COMPLETED_BOUNDED

    def test_supercritical_exponent_decays_toward_flat(self):
        g = make_grid(2, [32, 32], [1.0, 1.0])
        p = ModelParams(dim=2, chi=1.0, mu=0.0, c_d=1.0, m_exp=2.0)
        u0 = make_initial(g, InitialData.gaussian(1.5, 0.12))
        out = run(State(u=u0, v=np.zeros(g.shape)), p, g,
                  StepControl(t_end=5.0, safety=0.75), record_every=0.2)
        assert out.verdict is Verdict.COMPLETED_BOUNDED
        quarter = len(out.records) // 4
        early = max(r.linf_u for r in out.records[:quarter])
        late = max(r.linf_u for r in out.records[-quarter:])
        assert late <= early

    def test_invalid_initial_rejected(self):
        g = make_grid(1, [8], [1.0])
        p = ModelParams(dim=1, chi=1.0, mu=0.0, c_d=1.0, m_exp=1.0)
        u = np.ones(8)
        u[0] = -1.0
        with pytest.raises(StateCorruptionError):
            run(State(u=u, v=np.zeros(8)), p, g, StepControl(t_end=1.0),
                record_every=0.5)

    def test_first_order_convergence_homogeneous_logistic(self):
        g = make_grid(1, [4], [1.0])
        mu = 1.0
        p = ModelParams(dim=1, chi=1.0, mu=mu, c_d=1.0, m_exp=1.0)
        errs = []
        for dt in (0.02, 0.01):
            ctl = StepControl(t_end=2.0, safety=1.0, dt_max=dt)
            init = State(u=np.full(4, 0.5), v=np.full(4, 0.5))
            out = run(init, p, g, ctl, record_every=0.5)
            errs.append(abs(out.final_state.u[0] - logistic_exact(0.5, mu, 2.0)))
        ratio = errs[0] / errs[1]
        assert 1.8 <= ratio <= 2.2
