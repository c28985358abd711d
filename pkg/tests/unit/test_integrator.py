import math

import mpmath
import numpy as np
import pytest
from numpy.polynomial import chebyshev as npcheb

from nlscap import settings
from nlscap.integrator import (
    ChebFourierSolution,
    InclusionError,
    KappaError,
    MarchSchedule,
    StepFailure,
    StepSizeError,
    W0Error,
    approx_step,
    build_Uh,
    compute_W0,
    defect,
    defect_grid,
    find_radii,
    galerkin_field,
    inclusion_map,
    local_inclusion_unsplit,
    reference_orbit,
    tail_constants,
    time_march,
)
from nlscap.seqspace import CosineSeq, convolution_matrix


def _homogeneous(t: np.ndarray, z0: complex = 1j) -> np.ndarray:
    return z0 / (1 - 1j * z0 * t)


def _pointwise_field(coeffs: np.ndarray, h: float, t: float, size: int) -> np.ndarray:
    """``ȧ − i(La + a*a)`` of the Chebyshev-Fourier grid ``coeffs`` at time ``t``."""
    xi = 2 * t / h - 1
    value = np.zeros(size, dtype=complex)
    value[: coeffs.shape[1]] = npcheb.chebval(xi, coeffs)
    rate = np.zeros(size, dtype=complex)
    rate[: coeffs.shape[1]] = npcheb.chebval(xi, npcheb.chebder(coeffs)) * 2 / h
    symbols = -((2 * np.pi * np.arange(size)) ** 2)
    square = convolution_matrix(value, size) @ value
    return rate - 1j * (symbols * value + square)


class TestChebFourierSolution:
    def test_rejects_vectors(self):
        with pytest.raises(ValueError, match="need a grid"):
            ChebFourierSolution(0.1, [1.0, 2.0])

    def test_evaluation(self):
        rng = np.random.default_rng(11)
        coeffs = rng.normal(size=(4, 3)) + 1j * rng.normal(size=(4, 3))
        solution = ChebFourierSolution(0.2, coeffs, t0=1.0)
        assert solution.N == 4
        assert solution.K == 2
        assert solution.t_end == pytest.approx(1.2)
        np.testing.assert_allclose(solution(1.0)[0], solution.initial().mid, atol=1e-14)
        np.testing.assert_allclose(solution(1.2)[0], solution.endpoint().mid, atol=1e-14)
        assert solution([1.0, 1.1, 1.2]).shape == (3, 3)

    def test_norms(self):
        coeffs = [[1.0, 0.5], [0.0, -0.25j]]
        solution = ChebFourierSolution(0.1, coeffs)
        np.testing.assert_allclose(solution.mode_sums(), [1.0, 0.75])
        assert solution.norm_upper() == pytest.approx(2.5)
        assert solution.tail_norm_upper() == pytest.approx(1.5)
        assert solution.tail_dual_upper() == pytest.approx(0.75)

    def test_norm_bounds_samples(self):
        rng = np.random.default_rng(5)
        coeffs = rng.normal(size=(6, 4)) + 1j * rng.normal(size=(6, 4))
        solution = ChebFourierSolution(0.1, coeffs)
        samples = solution(np.linspace(0, 0.1, 50))
        weighted = np.abs(samples[:, 0]) + 2 * np.sum(np.abs(samples[:, 1:]), axis=1)
        assert np.max(weighted) <= solution.norm_upper()


class TestApproxStep:
    def test_zero_data(self):
        solution = approx_step(np.zeros(4), 0.01, 6, 3)
        assert solution.coeffs.shape == (6, 4)
        assert np.all(solution.coeffs == 0)

    def test_homogeneous_data(self):
        solution = approx_step([1j, 0.0, 0.0], 0.1, 13, 2)
        t = np.linspace(0, 0.1, 7)
        values = solution(t)
        np.testing.assert_allclose(values[:, 0], _homogeneous(t), atol=1e-9)
        np.testing.assert_allclose(values[:, 1:], 0.0, atol=1e-14)

    def test_matches_reference_orbit(self):
        phi = [0.5j, 0.02, 0.01j, 0.0]
        solution = approx_step(phi, 0.01, 10, 3, t0=0.3)
        times = np.linspace(0.3, 0.31, 5)
        reference = reference_orbit(phi, times, 3)
        np.testing.assert_allclose(solution(times), reference, atol=1e-9)

    def test_collocation_failure(self, monkeypatch):
        monkeypatch.setattr(settings, "COLLOCATION_MAX_ITERATIONS", 0)
        with pytest.raises(StepSizeError, match="smaller step"):
            approx_step([1j, 0.0], 0.1, 5, 1)


class TestDefect:
    def test_grid_matches_pointwise_field(self):
        rng = np.random.default_rng(2)
        coeffs = 0.1 * (rng.normal(size=(5, 3)) + 1j * rng.normal(size=(5, 3)))
        h = 0.1
        residual = defect_grid(ChebFourierSolution(h, coeffs))
        assert residual.shape == (9, 5)
        delta0, delta_inf = defect(ChebFourierSolution(h, coeffs))
        for t in np.linspace(0, h, 13):
            expected = _pointwise_field(coeffs, h, t, 5)
            computed = npcheb.chebval(2 * t / h - 1, residual.mid)
            np.testing.assert_allclose(computed, expected, rtol=1e-12, atol=1e-9)
            assert abs(expected[0]) <= delta0
            assert np.sum(2 * np.abs(expected[1:])) <= delta_inf

    def test_homogeneous_solution(self):
        solution = approx_step([1j, 0.0, 0.0], 0.05, 13, 2)
        delta0, delta_inf = defect(solution)
        assert delta0 < 1e-8
        assert delta_inf < 1e-100


class TestZeroModeGrowth:
    def test_zero(self):
        assert 1.0 <= compute_W0(np.zeros(3), 0.1) <= 1.0 + 4 * math.ulp(1.0)

    @pytest.mark.parametrize(
        "zero_mode", [[3.0, 0.0, 0.0], [1j, 0.0, 0.0], [0.5, 0.02j, -0.01j]]
    )
    def test_bounded_growth(self, zero_mode):
        w0 = compute_W0(zero_mode, 0.1)
        assert 1.0 <= w0 <= 1.01

    def test_growing_zero_mode(self):
        h = 0.1
        w0 = compute_W0([-1j, 0.0, 0.0], h)
        assert np.exp(2 * h) <= w0 <= 1.01 * np.exp(2 * h)

    def test_finer_subdivision_is_sharper(self):
        coarse = compute_W0([-1j, 0.3j], 0.1, subdivisions=4)
        fine = compute_W0([-1j, 0.3j], 0.1, subdivisions=256)
        assert fine <= coarse

    def test_overflow(self):
        with pytest.raises(W0Error, match="cannot be enclosed"):
            compute_W0([-1e6j, 0.0], 1.0)

    def test_invalid_subdivisions(self):
        with pytest.raises(ValueError, match="at least one subdivision"):
            compute_W0([1.0], 0.1, subdivisions=0)

    def test_subdivisions_follow_settings(self, monkeypatch):
        explicit = compute_W0([-1j, 0.3j], 0.1, subdivisions=4)
        monkeypatch.setattr(settings, "W0_SUBDIVISIONS", 4)
        assert compute_W0([-1j, 0.3j], 0.1) == explicit

    def test_march_reads_subdivisions(self, monkeypatch):
        monkeypatch.setattr(settings, "W0_SUBDIVISIONS", 0)
        schedule = MarchSchedule(h=0.01, n_cheb=5, fourier_K=2, max_steps=1)
        with pytest.raises(ValueError, match="at least one subdivision"):
            time_march(CosineSeq.from_point(1.0, [0.1j, 0.0, 0.0]), schedule)


class TestTailConstants:
    def test_unit_norm(self):
        w_inf, bar_w_inf, w_inf_sup = tail_constants(1.0, 0.1)
        x = mpmath.mpf("0.2")
        expected = float(mpmath.expm1(x) / 2)
        expected_bar = float((mpmath.expm1(x) - x) / 4)
        assert w_inf >= expected * (1 - 1e-15)
        assert w_inf == pytest.approx(expected, rel=1e-12)
        assert bar_w_inf >= expected_bar * (1 - 1e-15)
        assert bar_w_inf == pytest.approx(expected_bar, rel=1e-12)
        assert w_inf_sup == pytest.approx(float(mpmath.exp(x)), rel=1e-14)

    def test_vanishing_norm(self):
        h = 0.1
        w_inf, bar_w_inf, w_inf_sup = tail_constants(0.0, h)
        assert w_inf == pytest.approx(h, rel=1e-14)
        assert bar_w_inf == pytest.approx(h**2 / 2, rel=1e-14)
        assert w_inf_sup == 1.0

    @pytest.mark.parametrize("norm", [4.999, 5.001, 10.0])
    def test_closed_form(self, norm: float):
        h = 0.1
        x = mpmath.mpf(2 * norm) * mpmath.mpf(h)
        twice = 2 * mpmath.mpf(norm)
        expected = float(mpmath.expm1(x) / twice)
        expected_bar = float((mpmath.expm1(x) / twice - mpmath.mpf(h)) / twice)
        w_inf, bar_w_inf, _ = tail_constants(norm, h)
        assert w_inf == pytest.approx(expected, rel=1e-12)
        assert bar_w_inf == pytest.approx(expected_bar, rel=1e-10)

    def test_bounds_sampled_integrals(self):
        rng = np.random.default_rng(8)
        h = 0.05
        for norm in (0.3, 2.0, 40.0):
            w_inf, bar_w_inf, w_inf_sup = tail_constants(norm, h)
            for gap in rng.uniform(0, h, size=20):
                growth = 2 * norm * gap
                assert np.exp(growth) <= w_inf_sup
                assert np.expm1(growth) / (2 * norm) <= w_inf * (1 + 1e-12)
                double = (np.expm1(growth) / (2 * norm) - gap) / (2 * norm)
                assert double <= bar_w_inf * (1 + 1e-9)


class TestEvolutionBounds:
    def test_coupled(self):
        bounds = build_Uh(1.0, (0.1, 0.005, 1.2), 1.0, 1.0)
        assert bounds.kappa == pytest.approx(0.98)
        assert bounds.Uh[0, 0] == pytest.approx(1 / 0.98)
        assert bounds.Uh[0, 1] == pytest.approx(0.2 / 0.98)
        assert bounds.Uh[1, 0] == pytest.approx(0.2 / 0.98)
        assert bounds.Uh[1, 1] == pytest.approx(1.2 / 0.98)
        assert bounds.W_h == pytest.approx(1.4 / 0.98)

    def test_decoupled(self):
        bounds = build_Uh(1.25, (0.1, 0.005, 1.2), 0.0, 0.0)
        assert bounds.kappa == 1.0
        np.testing.assert_array_equal(bounds.Uh, [[1.25, 0.0], [0.0, 1.2]])

    def test_strong_coupling(self):
        with pytest.raises(KappaError, match="reduce the step size"):
            build_Uh(1.0, (0.1, 0.25, 1.2), 1.0, 1.0)


class TestRadii:
    def test_exact_data(self):
        rho = find_radii((0.0, 0.0), (0.0, 0.0), np.eye(2), 0.01)
        np.testing.assert_array_equal(rho, [0.0, 0.0])

    def test_affine_regime(self):
        uh = np.array([[1.0, 0.1], [0.1, 1.0]])
        eps = (1e-10, 2e-10)
        rho = find_radii(eps, (0.0, 0.0), uh, 1e-3)
        np.testing.assert_allclose(rho, [1.2e-10, 2.1e-10], rtol=1e-6)
        assert np.all(inclusion_map(rho, eps, (0.0, 0.0), uh, 1e-3) <= rho)

    def test_defect_contributes(self):
        rho = find_radii((0.0, 0.0), (1e-6, 1e-5), np.eye(2), 0.01)
        np.testing.assert_allclose(rho, [1e-8, 1e-7], rtol=1e-6)

    def test_quadratic_tail(self):
        eps, delta, h = (1e-10, 0.0), (1e-9, 0.0), 0.05
        rho = find_radii(eps, delta, np.eye(2), h)
        assert np.all(inclusion_map(rho, eps, delta, np.eye(2), h) <= rho)
        assert rho[0] == pytest.approx(1.5e-10, rel=1e-6)
        assert 0 < rho[1] < 1e-20

    def test_no_radii(self):
        with pytest.raises(InclusionError, match="No tube radii"):
            find_radii((1.0, 1.0), (0.0, 0.0), np.eye(2), 1.0)

    def test_unsplit(self):
        rho = local_inclusion_unsplit(1e-10, 0.0, 2.0, 1e-3)
        assert rho == pytest.approx(2e-10, rel=1e-6)

    def test_unsplit_failure(self):
        with pytest.raises(InclusionError, match="discriminant"):
            local_inclusion_unsplit(1.0, 0.0, 2.0, 1.0)


class TestMarchSchedule:
    def test_segments(self):
        schedule = MarchSchedule(segments=[(2, 1e-3), (3, 2e-3)])
        assert [schedule.step_size(i) for i in (0, 1, 2, 4, 10)] == [
            1e-3,
            1e-3,
            2e-3,
            2e-3,
            2e-3,
        ]
        assert MarchSchedule(h=5e-3).step_size(7) == 5e-3

    def test_invalid_segments(self):
        with pytest.raises(ValueError, match="positive counts"):
            MarchSchedule(segments=[(0, 1e-3)])

    def test_large_step_warns(self):
        with pytest.warns(RuntimeWarning, match="unusually large"):
            MarchSchedule(h=0.2)


class TestTimeMarch:
    def test_zero_solution(self):
        schedule = MarchSchedule(h=0.01, n_cheb=5, fourier_K=3, max_steps=3)
        steps = time_march(CosineSeq.zeros(1.0, 4), schedule)
        assert len(steps) == 3
        for step in steps:
            assert step.rho0 < 1e-100
            assert step.rho_inf < 1e-100
            assert 1.0 <= step.evolution.W0 <= 1.0 + 4 * math.ulp(1.0)
            assert step.verify()
        assert steps[-1].t_end == pytest.approx(0.03)

    def test_homogeneous_solution(self):
        schedule = MarchSchedule(h=0.05, n_cheb=10, fourier_K=2, max_steps=4)
        initial = CosineSeq.from_point(1.0, [1j, 0.0, 0.0])
        steps = time_march(initial, schedule)
        assert len(steps) == 4
        for previous, step in zip(steps, steps[1:]):
            assert step.eps0 >= previous.rho0
            assert step.eps_inf >= previous.rho_inf
            assert step.solution.t0 == pytest.approx(previous.t_end)
        final = steps[-1]
        assert final.rho0 < 1e-8
        endpoint = final.endpoint_enclosure()
        expected = _homogeneous(np.array(final.t_end))
        assert abs(endpoint.mid[0] - expected) <= final.rho0 + 1e-13
        assert endpoint.tail >= final.rho_inf

    def test_tube_contains_reference_orbit(self):
        phi = [0.5j, 0.01, 0.0, 0.0, 0.0]
        schedule = MarchSchedule(h=0.01, n_cheb=8, fourier_K=4, max_steps=3)
        steps = time_march(CosineSeq.from_point(1.0, phi), schedule)
        times = np.linspace(0, 0.03, 13)
        reference = reference_orbit(phi, times, 4)
        for t, row in zip(times, reference):
            step = next(s for s in steps if t <= s.t_end + 1e-15)
            gap = row - step.solution(t)[0]
            assert abs(gap[0]) <= step.rho0 + 1e-10
            assert 2 * np.sum(np.abs(gap[1:])) <= step.rho_inf + 1e-10
            assert step.rho0 < 1e-6
            assert step.rho_inf < 1e-6

    def test_stop_condition(self):
        schedule = MarchSchedule(h=0.01, n_cheb=5, fourier_K=2, max_steps=5)
        steps = time_march(
            CosineSeq.from_point(1.0, [0.1j, 0.0, 0.0]),
            schedule,
            stop=lambda step: step.index == 1,
        )
        assert [step.index for step in steps] == [0, 1]

    def test_initial_errors(self):
        schedule = MarchSchedule(h=0.01, n_cheb=5, fourier_K=2, max_steps=1)
        initial = CosineSeq.from_point(1.0, [0.1j, 0.0, 0.0], tail=1e-9)
        (step,) = time_march(initial, schedule, eps0=1e-10)
        assert step.eps0 >= 1e-10
        assert step.eps_inf >= 1e-9
        assert step.rho_inf >= 1e-9

    def test_failure(self, monkeypatch):
        monkeypatch.setattr(settings, "INCLUSION_CANDIDATES", 0)
        schedule = MarchSchedule(h=0.01, n_cheb=5, fourier_K=2, max_steps=3)
        with pytest.raises(StepFailure, match="Step 0") as exc_info:
            time_march(CosineSeq.from_point(1.0, [0.1j, 0.0, 0.0]), schedule)
        assert exc_info.value.step == 0
        assert exc_info.value.steps == []


def test_galerkin_field():
    a = np.array([1j, 0.0, 0.0])
    np.testing.assert_allclose(galerkin_field(a), [-1j, 0.0, 0.0])
    b = np.array([0.0, 1.0])
    np.testing.assert_allclose(galerkin_field(b), [2j, -1j * (2 * np.pi) ** 2])
