import math

import numpy as np
import pytest

from wigosc import (Gaussian2D, ModelParams, ParameterMismatch, PhasePoint, SdeConfig,
                    StepTooLarge, classical_flow, compare_to_propagator, derive,
                    ground_state, simulate_ensemble)


def make_params(big_d, big_b, no=None):
    return ModelParams.from_dimensionless(big_d, big_b, no)


class TestConfig:
    def test_step_guard(self):
        cfg = SdeConfig(dt=0.2, n_steps=10, n_trajectories=10, seed=1)
        with pytest.raises(StepTooLarge):
            simulate_ensemble(make_params(1.0, 0.1), cfg)

    def test_validation(self):
        with pytest.raises(ValueError):
            SdeConfig(dt=-0.1, n_steps=10, n_trajectories=10, seed=1)
        with pytest.raises(ValueError):
            SdeConfig(dt=0.01, n_steps=0, n_trajectories=10, seed=1)
        with pytest.raises(ValueError):
            SdeConfig(dt=0.01, n_steps=10, n_trajectories=10, seed=1, scheme="rk4")

    def test_record_indices_cover_endpoints(self):
        cfg = SdeConfig(dt=0.01, n_steps=1003, n_trajectories=10, seed=1, record_every=100)
        idx = cfg.record_indices()
        assert idx[0] == 0
        assert idx[-1] == 1003


class TestDeterministicLimit:
    def test_noiseless_rotation_matches_flow(self):
        # mu = 0, beta = 0, point start: pure rotation with bounded energy wobble
        params = ModelParams(mass=1.0, omega=1.0, beta=0.0, mu=0.0)
        d = derive(params)
        cfg = SdeConfig(dt=0.005, n_steps=int(4 * math.pi / 0.005), n_trajectories=1,
                        seed=7, record_every=314)
        report = simulate_ensemble(params, cfg, initial=PhasePoint(1.0, 0.0))
        for i, t in enumerate(report.times):
            expected = classical_flow(d, float(t)).matrix @ (1.0, 0.0)
            np.testing.assert_allclose(report.mean[i], expected, atol=4e-3)
        energy = report.mean[:, 0] ** 2 + report.mean[:, 1] ** 2
        assert np.max(np.abs(energy - 1.0)) < 2.5 * 0.005  # O(omega*dt) wobble

    def test_explicit_scheme_inflates_volume(self):
        params = ModelParams(mass=1.0, omega=1.0, beta=0.0, mu=0.0)
        n = int(4 * math.pi / 0.01)
        base = dict(dt=0.01, n_steps=n, n_trajectories=1, seed=7, record_every=n)
        semi = simulate_ensemble(params, SdeConfig(**base), initial=PhasePoint(1.0, 0.0))
        expl = simulate_ensemble(params, SdeConfig(scheme="explicit", **base),
                                 initial=PhasePoint(1.0, 0.0))
        e_semi = semi.mean[-1, 0] ** 2 + semi.mean[-1, 1] ** 2
        e_expl = expl.mean[-1, 0] ** 2 + expl.mean[-1, 1] ** 2
        assert abs(e_semi - 1.0) < 0.03
        assert e_expl - 1.0 > 0.1  # exp(omega^2 dt t) - 1 ~ 13%

    def test_mean_envelope_decays_at_half_friction_rate(self):
        # noiseless displaced start recorded at full reduced periods
        params = ModelParams(mass=1.0, omega=1.0, beta=0.2, mu=0.0)
        d = derive(params)
        period = 2.0 * math.pi / d.omega_damped
        dt = period / 1250
        cfg = SdeConfig(dt=dt, n_steps=5 * 1250, n_trajectories=1, seed=3,
                        record_every=1250)
        report = simulate_ensemble(params, cfg, initial=PhasePoint(3.0, 0.0))
        amp = np.hypot(report.mean[:, 0], report.mean[:, 1])
        rate = -np.polyfit(report.times, np.log(amp), 1)[0]
        assert rate == pytest.approx(params.beta / 2.0, rel=0.01)


class TestMoments:
    def test_thermalisation_second_moments(self):
        # mu = 2 m beta theta drives Var(q) -> theta/(m w^2), Var(P) -> m theta
        params = ModelParams(mass=1.0, omega=1.0, beta=0.3, theta=2.0)
        n = 20000
        cfg = SdeConfig(dt=0.005, n_steps=4000, n_trajectories=n, seed=11,
                        record_every=4000)
        report = simulate_ensemble(params, cfg)
        # dimensionless: Var(X) = Var(y) = D/2 = theta/(hbar*omega)
        half_d = 2.0
        se = half_d * math.sqrt(2.0 / (n - 1))
        assert abs(report.cov[-1, 0, 0] - half_d) < 4 * se
        assert abs(report.cov[-1, 1, 1] - half_d) < 4 * se
        assert abs(report.cov[-1, 0, 1]) < 4 * half_d / math.sqrt(n - 1)

    def test_displaced_mean_tracks_flow_within_errors(self):
        params = ModelParams(mass=1.0, omega=1.0, beta=0.1, theta=0.5)
        d = derive(params)
        n = 20000
        cfg = SdeConfig(dt=0.005, n_steps=3000, n_trajectories=n, seed=5,
                        record_every=600)
        start = Gaussian2D(np.array([2.0, -1.0]), 0.5 * np.eye(2))
        report = simulate_ensemble(params, cfg, initial=start)
        for i, t in enumerate(report.times):
            expected = classical_flow(d, float(t)).matrix @ start.mean
            np.testing.assert_allclose(report.mean[i], expected,
                                       atol=4.5 * float(np.max(report.se_mean[i])))

    def test_standard_errors_scale_with_ensemble_size(self):
        params = ModelParams(mass=1.0, omega=1.0, beta=0.2, theta=1.0)
        reports = [simulate_ensemble(params, SdeConfig(dt=0.01, n_steps=500,
                                                       n_trajectories=n, seed=21,
                                                       record_every=500))
                   for n in (2000, 8000)]
        ratio = reports[0].se_mean[-1] / reports[1].se_mean[-1]
        np.testing.assert_allclose(ratio, 2.0, rtol=0.25)

    def test_weak_order_one(self):
        # halving dt roughly halves the moment bias of the explicit scheme
        from wigosc import propagator
        params = ModelParams(mass=1.0, omega=1.0, beta=0.1, theta=1.0)
        d = derive(params)
        t_end = 10.0  # beta*t = 1
        flow = classical_flow(d, t_end).matrix
        exact = flow @ (0.5 * np.eye(2)) @ flow.T + propagator(d, t_end).cov_physical
        biases = []
        for dt in (0.02, 0.01):
            cfg = SdeConfig(dt=dt, n_steps=int(round(t_end / dt)), n_trajectories=30000,
                            seed=31, scheme="explicit", record_every=10 ** 9)
            report = simulate_ensemble(params, cfg)
            biases.append((np.trace(report.cov[-1]) - np.trace(exact)) / np.trace(exact))
        assert biases[0] > 0 and biases[1] > 0
        assert biases[0] / biases[1] == pytest.approx(2.0, abs=0.6)


class TestDeterminism:
    def test_bit_identical_across_runs_and_threads(self):
        params = ModelParams(mass=1.0, omega=1.0, beta=0.25, theta=1.5)
        base = dict(dt=0.01, n_steps=400, n_trajectories=6000, seed=99, record_every=100)
        r1 = simulate_ensemble(params, SdeConfig(threads=1, **base))
        r2 = simulate_ensemble(params, SdeConfig(threads=1, **base))
        r4 = simulate_ensemble(params, SdeConfig(threads=4, **base))
        assert r1.digest() == r2.digest() == r4.digest()

    def test_seed_changes_stream(self):
        params = ModelParams(mass=1.0, omega=1.0, beta=0.25, theta=1.5)
        base = dict(dt=0.01, n_steps=200, n_trajectories=2000, record_every=200)
        r1 = simulate_ensemble(params, SdeConfig(seed=1, **base))
        r2 = simulate_ensemble(params, SdeConfig(seed=2, **base))
        assert r1.digest() != r2.digest()


@pytest.fixture(scope="module")
def clean_run():
    params = ModelParams(mass=1.0, omega=1.0, beta=0.3, theta=2.0)
    cfg = SdeConfig(dt=0.005, n_steps=4000, n_trajectories=20000, seed=17,
                    record_every=400)
    return params, simulate_ensemble(params, cfg)


class TestComparison:
    def test_deterministic_corner_passes(self):
        # zero noise, zero friction, point start: agreement up to the
        # integrator's own accuracy, despite zero sampling error
        params = ModelParams(mass=1.0, omega=1.0, beta=0.0, mu=0.0)
        cfg = SdeConfig(dt=0.005, n_steps=2000, n_trajectories=8, seed=2,
                        record_every=500)
        report = simulate_ensemble(params, cfg, initial=PhasePoint(1.0, 0.0))
        verdict = compare_to_propagator(report, derive(params))
        assert verdict.passed
        assert np.all(np.isfinite(verdict.z_scores) | (verdict.z_scores == 0.0))

    def test_clean_run_passes(self, clean_run):
        params, report = clean_run
        verdict = compare_to_propagator(report, derive(params))
        assert verdict.passed, (verdict.max_abs_z, verdict.threshold,
                                verdict.worst_component, verdict.worst_time)

    def test_parameter_guard(self, clean_run):
        params, report = clean_run
        wrong = derive(ModelParams(mass=1.0, omega=1.0, beta=0.31, theta=2.0))
        with pytest.raises(ParameterMismatch):
            compare_to_propagator(report, wrong)

    def test_negative_control_fails(self, clean_run):
        # deliberately wrong friction must be detected
        params, report = clean_run
        wrong = derive(ModelParams(mass=1.0, omega=1.0, beta=0.3 * 1.25, theta=2.0))
        verdict = compare_to_propagator(report, wrong, allow_mismatch=True)
        assert not verdict.passed
        assert verdict.max_abs_z > verdict.threshold

    def test_zscore_layout(self, clean_run):
        params, report = clean_run
        verdict = compare_to_propagator(report, derive(params))
        assert verdict.z_scores.shape == (len(report.times), 5)
        assert verdict.n_comparisons == verdict.z_scores.size


class TestReportViews:
    def test_canonical_scaling(self):
        params = ModelParams(mass=1.0, omega=1.0, beta=0.2, theta=1.0)
        cfg = SdeConfig(dt=0.01, n_steps=300, n_trajectories=3000, seed=41,
                        record_every=150)
        report = simulate_ensemble(params, cfg)
        grow = np.exp(params.beta * report.times)
        np.testing.assert_allclose(report.canonical_mean()[:, 0],
                                   report.mean[:, 0] * grow, rtol=1e-14)
        np.testing.assert_allclose(report.canonical_cov()[:, 0, 0],
                                   report.cov[:, 0, 0] * grow ** 2, rtol=1e-14)
        np.testing.assert_allclose(report.canonical_cov()[:, 1, 1],
                                   report.cov[:, 1, 1], rtol=0)

    def test_initial_state_recorded(self):
        params = ModelParams(mass=1.0, omega=1.0, beta=0.2, theta=1.0)
        cfg = SdeConfig(dt=0.01, n_steps=50, n_trajectories=500, seed=42)
        start = Gaussian2D(np.array([0.5, 0.5]), 0.6 * np.eye(2))
        report = simulate_ensemble(params, cfg, initial=start)
        np.testing.assert_array_equal(report.initial_mean, start.mean)
        np.testing.assert_array_equal(report.initial_cov, start.cov)
        # ground default
        report0 = simulate_ensemble(params, cfg)
        np.testing.assert_array_equal(report0.initial_cov, ground_state().cov)
