"""Steppers and averaging: convergence order, analytic envelopes, noise, aborts."""

import io
import math

import numpy as np
import pytest

from contactdyn.core import contact_vector_field
from contactdyn.integrate import (
    AverageAccumulator,
    NoiseSpec,
    Trajectory,
    euler_maruyama_langevin,
    integrate_adaptive,
    integrate_fixed,
    langevin_ensemble,
    time_average,
    trapezoid_average,
    write_trajectory_csv,
)

from conftest import damped_oscillator_h, parachute_h

LAYOUT_SQP = ("s", "q[0]", "p[0]")


def contact_rhs(h):
    """Flat-vector adapter (s, q, p) for a one-degree-of-freedom Hamiltonian."""
    from contactdyn.core import DarbouxPoint

    def rhs(t, y):
        v = contact_vector_field(h, DarbouxPoint(s=y[0], q=y[1:2], p=y[2:3]))
        return np.array([v.ds, v.dq[0], v.dp[0]])

    return rhs


class TestFixedStep:
    def test_harmonic_one_period(self):
        rhs = contact_rhs(damped_oscillator_h(gamma=0.0))
        traj = integrate_fixed(rhs, [0.0, 1.0, 0.0], T=2 * math.pi, dt=1e-3, layout=LAYOUT_SQP)
        assert not traj.aborted
        assert traj.t_final == pytest.approx(2 * math.pi, abs=1e-12)
        assert traj.states[-1, 1] == pytest.approx(1.0, abs=1e-9)
        assert traj.states[-1, 2] == pytest.approx(0.0, abs=1e-9)

    def test_fourth_order_convergence(self):
        rhs = contact_rhs(damped_oscillator_h(gamma=0.0))
        errs = []
        for dt in (0.1, 0.05):
            traj = integrate_fixed(rhs, [0.0, 1.0, 0.0], T=2 * math.pi, dt=dt,
                                   layout=LAYOUT_SQP, sample_every=1)
            err = abs(traj.states[-1, 1] - 1.0) + abs(traj.states[-1, 2] - 0.0)
            errs.append(err)
        ratio = errs[0] / errs[1]
        assert 12.0 <= ratio <= 20.0, f"order-check ratio {ratio}"

    def test_damped_energy_envelope(self):
        # E(t) exp(gamma t) oscillates about E0 with relative excursion just
        # above gamma/2 (it reaches ~1.0526 E0 for gamma = 0.1), so the bound
        # here is 1.06 rather than 1.05
        gamma = 0.1
        rhs = contact_rhs(damped_oscillator_h(gamma=gamma))
        traj = integrate_fixed(rhs, [0.0, 1.0, 0.0], T=40.0, dt=1e-3, layout=LAYOUT_SQP)
        q, p = traj.states[:, 1], traj.states[:, 2]
        energy = 0.5 * (p**2 + q**2)
        ratio = energy * np.exp(gamma * traj.times) / 0.5
        assert ratio.max() < 1.06
        assert energy[-1] < 0.5 * math.exp(-gamma * 39.0)

    def test_parachute_terminal_velocity(self):
        rhs = contact_rhs(parachute_h())
        traj = integrate_fixed(rhs, [0.0, 0.0, 0.0], T=20.0, dt=1e-3, layout=LAYOUT_SQP)
        s, p = traj.states[-1, 0], traj.states[-1, 2]
        velocity = (p - 2 * 0.5 * s) / 1.0
        assert velocity == pytest.approx(-math.sqrt(10.0 / 0.5), abs=1e-4)

    def test_final_partial_step_lands_on_T(self):
        rhs = contact_rhs(damped_oscillator_h())
        traj = integrate_fixed(rhs, [0.0, 1.0, 0.0], T=1.0005, dt=1e-3, layout=LAYOUT_SQP)
        assert traj.t_final == 1.0005

    def test_sampling_stride(self):
        rhs = contact_rhs(damped_oscillator_h())
        traj = integrate_fixed(rhs, [0.0, 1.0, 0.0], T=1.0, dt=0.01,
                               layout=LAYOUT_SQP, sample_every=10)
        np.testing.assert_allclose(np.diff(traj.times), 0.1, rtol=1e-12)
        assert traj.n_samples == 11

    def test_abort_on_blowup(self):
        # qdot = q^2 blows up in finite time (t* = 1/q0)
        def rhs(t, y):
            return np.array([y[0] ** 2])

        traj = integrate_fixed(rhs, [1.0], T=2.0, dt=1e-3, layout=("q",))
        assert traj.aborted
        assert "non-finite" in traj.abort_reason or "failed" in traj.abort_reason
        assert traj.n_samples >= 2  # valid prefix retained
        assert np.isfinite(traj.states).all()

    def test_parameter_validation(self):
        rhs = contact_rhs(damped_oscillator_h())
        with pytest.raises(ValueError):
            integrate_fixed(rhs, [0.0, 1.0, 0.0], T=-1.0, dt=1e-3, layout=LAYOUT_SQP)
        with pytest.raises(ValueError):
            integrate_fixed(rhs, [0.0, 1.0, 0.0], T=1.0, dt=2.0, layout=LAYOUT_SQP)
        with pytest.raises(ValueError):
            integrate_fixed(rhs, [0.0, 1.0, 0.0], T=1.0, dt=1e-3,
                            layout=LAYOUT_SQP, sample_every=0)


class TestAdaptive:
    def test_matches_fixed_on_harmonic(self):
        rhs = contact_rhs(damped_oscillator_h(gamma=0.0))
        fixed = integrate_fixed(rhs, [0.0, 1.0, 0.0], T=2 * math.pi, dt=1e-3,
                                layout=LAYOUT_SQP)
        adaptive = integrate_adaptive(rhs, [0.0, 1.0, 0.0], T=2 * math.pi,
                                      rel_tol=1e-10, abs_tol=1e-12, layout=LAYOUT_SQP)
        assert not adaptive.aborted
        np.testing.assert_allclose(adaptive.states[-1], fixed.states[-1], atol=1e-8)

    def test_endpoint_exact(self):
        rhs = contact_rhs(damped_oscillator_h())
        traj = integrate_adaptive(rhs, [0.0, 1.0, 0.0], T=10.0, layout=LAYOUT_SQP)
        assert traj.t_final == 10.0

    def test_dense_output_grid(self):
        rhs = contact_rhs(damped_oscillator_h(gamma=0.0))
        traj = integrate_adaptive(rhs, [0.0, 1.0, 0.0], T=5.0, rel_tol=1e-9,
                                  abs_tol=1e-11, layout=LAYOUT_SQP, sample_interval=0.1)
        # uniform grid plus exact endpoint; interpolation follows cos t closely
        np.testing.assert_allclose(np.diff(traj.times), 0.1, rtol=1e-9)
        np.testing.assert_allclose(traj.states[:, 1], np.cos(traj.times), atol=1e-7)

    def test_step_underflow_aborts(self):
        # derivative with a pole at q = 1: forces endless shrinking
        def rhs(t, y):
            return np.array([1.0 / (1.0 - y[0])])

        traj = integrate_adaptive(rhs, [0.0], T=10.0, rel_tol=1e-8, abs_tol=1e-10,
                                  layout=("q",))
        assert traj.aborted
        assert "underflow" in traj.abort_reason or "failed" in traj.abort_reason
        assert traj.times[-1] < 10.0

    def test_rejection_counters_recorded(self):
        rhs = contact_rhs(damped_oscillator_h())
        traj = integrate_adaptive(rhs, [0.0, 1.0, 0.0], T=10.0, layout=LAYOUT_SQP)
        assert traj.meta["n_accepted"] > 0
        assert traj.meta["n_rejected"] >= 0

    def test_tolerance_validation(self):
        rhs = contact_rhs(damped_oscillator_h())
        with pytest.raises(ValueError):
            integrate_adaptive(rhs, [0.0, 1.0, 0.0], T=1.0, rel_tol=0.0, layout=LAYOUT_SQP)


class TestVolumeContraction:
    def test_box_contraction_matches_divergence(self):
        # det of the flow-map Jacobian after time T equals exp(-(n+1) gamma T)
        gamma, T = 0.1, 5.0
        rhs = contact_rhs(damped_oscillator_h(gamma=gamma))
        x0 = np.array([0.0, 1.0, 0.0])

        def flow(x):
            traj = integrate_fixed(rhs, x, T=T, dt=1e-3, layout=LAYOUT_SQP)
            return traj.states[-1]

        eps = 1e-6
        J = np.empty((3, 3))
        for j in range(3):
            dx = np.zeros(3)
            dx[j] = eps
            J[:, j] = (flow(x0 + dx) - flow(x0 - dx)) / (2 * eps)
        det = np.linalg.det(J)
        assert det == pytest.approx(math.exp(-2 * gamma * T), rel=0.01)


class TestLangevin:
    def spec(self, **kw):
        args = dict(m=1.0, gamma=0.5, k_BT=1.0, seed=12345)
        args.update(kw)
        return NoiseSpec(**args)

    def test_seed_reproducibility(self):
        a = euler_maruyama_langevin(1.0, self.spec(), (0.0, 1.0, 0.0), T=1.0, dt=1e-3)
        b = euler_maruyama_langevin(1.0, self.spec(), (0.0, 1.0, 0.0), T=1.0, dt=1e-3)
        np.testing.assert_array_equal(a.states, b.states)

    def test_different_seed_differs(self):
        a = euler_maruyama_langevin(1.0, self.spec(), (0.0, 1.0, 0.0), T=1.0, dt=1e-3)
        c = euler_maruyama_langevin(1.0, self.spec(seed=999), (0.0, 1.0, 0.0), T=1.0, dt=1e-3)
        assert not np.array_equal(a.states, c.states)

    def test_zero_noise_is_euler(self):
        m, omega, gamma, dt = 1.0, 1.0, 0.05, 1e-3
        traj = euler_maruyama_langevin(
            omega, self.spec(gamma=gamma, k_BT=0.0), (0.0, 1.0, 0.5), T=0.1, dt=dt,
            sample_every=1,
        )
        s, q, p = 0.0, 1.0, 0.5
        for i in range(1, traj.n_samples):
            ds = p * p / (2 * m) - m * omega**2 * q * q / 2 - gamma * s
            s, q, p = s + dt * ds, q + dt * (p / m), p + dt * (-gamma * p - m * omega**2 * q)
            assert traj.states[i, 1] == pytest.approx(s, rel=1e-14, abs=1e-300)
            assert traj.states[i, 2] == pytest.approx(q, rel=1e-14)
            assert traj.states[i, 3] == pytest.approx(p, rel=1e-14)

    def test_ensemble_member_bit_matches_single_run(self):
        spec = self.spec(seed=777)
        stats = langevin_ensemble(1.0, spec, (0.0, 1.0, 0.0), T=2.0, dt=1e-3, n_traj=3)
        for i in range(3):
            single = euler_maruyama_langevin(
                1.0, self.spec(seed=777 ^ i), (0.0, 1.0, 0.0), T=2.0, dt=1e-3
            )
            sstats = single.meta["stats"]
            assert stats.avg_p2[i] == sstats.avg_p2[0]
            assert stats.avg_q2[i] == sstats.avg_q2[0]
            assert stats.noise_virial[i] == sstats.noise_virial[0]
            assert stats.G_final[i] == sstats.G_final[0]

    def test_equipartition_small_ensemble(self):
        # coarse 3-sigma style sanity check at modest cost; the full-size
        # ensemble lives in the acceptance suite
        spec = self.spec(seed=2024)
        stats = langevin_ensemble(1.0, spec, (0.0, 1.0, 0.0), T=50.0, dt=1e-3, n_traj=64)
        ke = stats.avg_p2.mean() / 2.0
        pe = stats.avg_q2.mean() / 2.0
        assert ke == pytest.approx(0.5, rel=0.15)
        assert pe == pytest.approx(0.5, rel=0.15)

    def test_guard_on_coarse_step(self):
        with pytest.raises(ValueError, match="gamma"):
            euler_maruyama_langevin(1.0, self.spec(gamma=200.0), (0.0, 1.0, 0.0),
                                    T=1.0, dt=1e-3)

    def test_noise_spec_validation(self):
        with pytest.raises(ValueError):
            NoiseSpec(m=-1.0, gamma=0.5, k_BT=1.0, seed=0)
        with pytest.raises(ValueError):
            NoiseSpec(m=1.0, gamma=0.0, k_BT=1.0, seed=0)
        with pytest.raises(ValueError):
            NoiseSpec(m=1.0, gamma=0.5, k_BT=-0.5, seed=0)
        assert NoiseSpec(m=2.0, gamma=0.5, k_BT=2.0, seed=0).amplitude == pytest.approx(2.0)


class TestAveraging:
    def test_constant_average(self):
        times = np.linspace(0.0, 7.3, 1001)
        assert trapezoid_average(times, np.full(1001, 4.2)) == pytest.approx(4.2, rel=1e-14)

    def test_accumulator_constant(self):
        acc = AverageAccumulator()
        for t in np.linspace(0.0, 3.0, 500):
            acc.add(t, -2.5)
        assert acc.average == pytest.approx(-2.5, rel=1e-14)

    def test_accumulator_merge_matches_single_pass(self):
        rng = np.random.default_rng(0)
        times = np.sort(rng.uniform(0, 10, 400))
        values = rng.normal(size=400)
        whole = AverageAccumulator()
        left, right = AverageAccumulator(), AverageAccumulator()
        for t, v in zip(times, values):
            whole.add(t, v)
            (left if t < 5.0 else right).add(t, v)
        merged = left.merge(right)
        assert merged.average == pytest.approx(whole.average, rel=1e-13)
        assert merged.count == whole.count

    def test_odd_function_over_period(self):
        rhs = contact_rhs(damped_oscillator_h(gamma=0.0))
        traj = integrate_fixed(rhs, [0.0, 1.0, 0.0], T=2 * math.pi, dt=1e-3,
                               layout=LAYOUT_SQP, sample_every=1)
        assert time_average(traj, traj.states[:, 1]) == pytest.approx(0.0, abs=1e-8)

    def test_quadratic_over_period(self):
        rhs = contact_rhs(damped_oscillator_h(gamma=0.0))
        traj = integrate_fixed(rhs, [0.0, 1.0, 0.0], T=2 * math.pi, dt=1e-3,
                               layout=LAYOUT_SQP, sample_every=1)
        assert time_average(traj, traj.states[:, 1] ** 2) == pytest.approx(0.5, abs=1e-6)

    def test_window_start_interpolates(self):
        times = np.array([0.0, 1.0, 2.0, 3.0])
        values = np.array([0.0, 1.0, 2.0, 3.0])  # v = t
        # over [0.5, 3]: mean of t = 1.75
        assert trapezoid_average(times, values, t0=0.5) == pytest.approx(1.75, rel=1e-14)

    def test_aborted_rejected_by_default(self):
        def rhs(t, y):
            return np.array([y[0] ** 2])

        traj = integrate_fixed(rhs, [1.0], T=2.0, dt=1e-3, layout=("q",))
        with pytest.raises(ValueError, match="aborted"):
            time_average(traj, traj.states[:, 0])
        # explicit override still works on the valid prefix
        val = time_average(traj, traj.states[:, 0], allow_aborted=True)
        assert math.isfinite(val)

    def test_callable_observable(self):
        times = np.array([0.0, 1.0, 2.0])
        states = np.array([[1.0], [2.0], [3.0]])
        traj = Trajectory(times=times, states=states, layout=("q",))
        assert time_average(traj, lambda t, row: row[0]) == pytest.approx(2.0)

    def test_window_beyond_data_rejected(self):
        with pytest.raises(ValueError):
            trapezoid_average(np.array([0.0, 1.0]), np.array([1.0, 1.0]), t0=2.0)


class TestTrajectoryType:
    def test_monotonic_times_enforced(self):
        with pytest.raises(ValueError):
            Trajectory(times=np.array([0.0, 0.0]), states=np.zeros((2, 1)), layout=("q",))

    def test_layout_length_enforced(self):
        with pytest.raises(ValueError):
            Trajectory(times=np.array([0.0]), states=np.zeros((1, 2)), layout=("q",))

    def test_column_access(self):
        traj = Trajectory(times=np.array([0.0, 1.0]),
                          states=np.array([[1.0, 2.0], [3.0, 4.0]]),
                          layout=("a", "b"))
        np.testing.assert_array_equal(traj.column("b"), [2.0, 4.0])


class TestCsv:
    def test_round_trip_17_digits(self):
        rhs = contact_rhs(damped_oscillator_h())
        traj = integrate_fixed(rhs, [0.0, 1.0, 0.0], T=0.5, dt=1e-3, layout=LAYOUT_SQP)
        buf = io.StringIO()
        write_trajectory_csv(traj, buf, observables={"energy": traj.states[:, 2] ** 2})
        lines = buf.getvalue().strip().split("\n")
        assert lines[0] == "t,s,q[0],p[0],energy"
        parsed = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
        np.testing.assert_array_equal(parsed[:, 0], traj.times)
        np.testing.assert_array_equal(parsed[:, 1:4], traj.states)
        np.testing.assert_array_equal(parsed[:, 4], traj.states[:, 2] ** 2)

    def test_deterministic_bytes(self):
        rhs = contact_rhs(damped_oscillator_h())
        outs = []
        for _ in range(2):
            traj = integrate_fixed(rhs, [0.0, 1.0, 0.0], T=0.5, dt=1e-3, layout=LAYOUT_SQP)
            buf = io.StringIO()
            write_trajectory_csv(traj, buf)
            outs.append(buf.getvalue())
        assert outs[0] == outs[1]

    def test_observable_length_mismatch(self):
        traj = Trajectory(times=np.array([0.0, 1.0]), states=np.zeros((2, 1)), layout=("q",))
        with pytest.raises(ValueError):
            write_trajectory_csv(traj, io.StringIO(), observables={"x": np.zeros(3)})
