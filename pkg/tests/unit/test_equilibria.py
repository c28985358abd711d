import numpy as np
import pytest

from nlscap import settings
from nlscap.equilibria import (
    CandidateTriple,
    EquilibriumProblem,
    IntervalTriple,
    NoConvergenceError,
    ValidationCertificate,
    assemble_F,
    bounds,
    build_linearization,
    component_bounds,
    component_radii,
    conjugate,
    eigen_seed,
    family_names,
    load_family,
    mu_enclosure,
    newton_solve,
    refine_steady_state,
    row_block_norms,
    seed_from_lattice,
    validate_candidate,
)
from nlscap.interval import ComplexInterval
from nlscap.seqspace import CosineSeq, convolution_matrix

U1_TAU = 0.5 + 0.8660254037844386j


def _projected_residual(candidate: CandidateTriple) -> np.ndarray:
    mu = EquilibriumProblem(candidate.m).mu
    conv_a = convolution_matrix(candidate.a_bar, candidate.m)
    f1 = mu * candidate.a_bar + conv_a @ candidate.a_bar
    f2 = (
        1j * (mu * candidate.b_bar + 2 * conv_a @ candidate.b_bar)
        - candidate.lambda_bar * candidate.b_bar
    )
    return np.concatenate([[candidate.phase_residual()], f1, f2])


@pytest.fixture(scope="module")
def problem() -> EquilibriumProblem:
    return EquilibriumProblem(m=14)


@pytest.fixture(scope="module")
def candidate(problem: EquilibriumProblem) -> CandidateTriple:
    return newton_solve(problem, load_family("u1", problem.m))


@pytest.fixture(scope="module")
def certificate(
    problem: EquilibriumProblem, candidate: CandidateTriple
) -> ValidationCertificate:
    return validate_candidate(candidate, problem)


class TestEquilibriumProblem:
    def test_requires_two_modes(self):
        with pytest.raises(ValueError, match=r"at least 2"):
            EquilibriumProblem(m=1)

    def test_mu(self):
        problem = EquilibriumProblem(m=3)
        np.testing.assert_allclose(problem.mu, [0.0, -4 * np.pi**2, -16 * np.pi**2])
        enclosure = mu_enclosure(3)
        assert bool(np.all(enclosure.contains(problem.mu)))


class TestCandidateTriple:
    def test_shapes_must_match(self):
        with pytest.raises(ValueError, match=r"different sizes"):
            CandidateTriple(1.0, [1.0, 2.0], [1.0])

    def test_phase_index_in_range(self):
        with pytest.raises(ValueError, match=r"exceeds"):
            CandidateTriple(1.0, [1.0, 2.0], [1.0, 0.0], phase_index=2)

    def test_vector_layout(self):
        triple = CandidateTriple(2j, [1.0, 2.0], [3.0, 4.0], phase_index=1)
        vector = triple.to_vector()
        np.testing.assert_array_equal(vector, [2j, 1.0, 2.0, 3.0, 4.0])
        restored = CandidateTriple.from_vector(vector, phase_index=1)
        assert restored.lambda_bar == 2j
        np.testing.assert_array_equal(restored.b_bar, [3.0, 4.0])


class TestAssembleF:
    def test_zero_input(self):
        problem = EquilibriumProblem(m=3)
        zero = IntervalTriple(
            ComplexInterval.point(0.0),
            CosineSeq.zeros(problem.nu, 3),
            CosineSeq.zeros(problem.nu, 3),
        )
        residual = assemble_F(zero, problem)
        assert bool(residual.lam.contains(-1.0))
        assert residual.a.size == 5
        assert bool(np.all(residual.a.coeffs.contains(0.0)))
        assert bool(np.all(residual.b.coeffs.contains(0.0)))

    def test_encloses_point_evaluation(self):
        problem = EquilibriumProblem(m=4)
        rng = np.random.default_rng(seed=3)
        a = rng.normal(size=4) + 1j * rng.normal(size=4)
        b = rng.normal(size=4) + 1j * rng.normal(size=4)
        triple = CandidateTriple(0.5 - 2j, a, b, phase_index=2)
        residual = assemble_F(IntervalTriple.from_candidate(triple, 1.0), problem)
        expected = _projected_residual(triple)
        assert bool(residual.lam.contains(expected[0]))
        assert bool(np.all(residual.a.coeffs[:4].contains(expected[1:5])))
        assert bool(np.all(residual.b.coeffs[:4].contains(expected[5:])))

    def test_rejects_tails(self):
        problem = EquilibriumProblem(m=2)
        with_tail = IntervalTriple(
            ComplexInterval.point(0.0),
            CosineSeq.from_point(1.0, [1.0, 0.0], tail=1e-3),
            CosineSeq.zeros(1.0, 2),
        )
        with pytest.raises(ValueError, match=r"finite sequences"):
            assemble_F(with_tail, problem)


class TestSeeds:
    def test_lattice_coefficients(self):
        a = seed_from_lattice(U1_TAU, 4)
        assert a[0] == pytest.approx(21.766, abs=1e-3)
        assert a[1] == pytest.approx(15.526j, abs=1e-3)
        assert a[2] == pytest.approx(-2.0528, abs=1e-3)
        assert a[3] == pytest.approx(-0.2027j, abs=1e-3)

    def test_lower_half_plane(self):
        with pytest.raises(ValueError, match=r"upper half plane"):
            seed_from_lattice(0.5 - 1j, 4)

    def test_half_period_shift(self):
        a = seed_from_lattice(U1_TAU, 5)
        shifted = seed_from_lattice(U1_TAU, 5, shift=0.5)
        np.testing.assert_allclose(shifted, a * (-1.0) ** np.arange(5))

    def test_families(self):
        assert family_names() == ["u1", "u1-conjugate", "u2", "u2-conjugate"]
        np.testing.assert_allclose(
            load_family("u1-conjugate", 6), np.conj(load_family("u1", 6))
        )

    def test_unknown_family(self):
        with pytest.raises(KeyError, match=r"u3"):
            load_family("u3", 4)


class TestNewton:
    def test_zero_seed_is_fixed(self):
        problem = EquilibriumProblem(m=5)
        np.testing.assert_array_equal(refine_steady_state(problem, [0.0]), np.zeros(5))

    def test_seed_is_padded_and_truncated(self):
        problem = EquilibriumProblem(m=6)
        short = refine_steady_state(problem, seed_from_lattice(U1_TAU, 4))
        long = refine_steady_state(problem, seed_from_lattice(U1_TAU, 20))
        np.testing.assert_allclose(short, long, atol=1e-10)

    def test_steady_state_is_close_to_seed(self, candidate: CandidateTriple):
        seed = seed_from_lattice(U1_TAU, candidate.m)
        np.testing.assert_allclose(candidate.a_bar, seed, atol=1e-8)

    def test_small_residual(self, candidate: CandidateTriple):
        residual = _projected_residual(candidate)
        assert np.max(np.abs(residual)) < 1e-8
        assert candidate.b_bar[candidate.phase_index] == pytest.approx(1.0)
        assert candidate.lambda_bar.real > 0

    def test_conjugate_solves_projected_problem(self, candidate: CandidateTriple):
        mirrored = conjugate(candidate)
        assert mirrored.lambda_bar == -np.conj(candidate.lambda_bar)
        assert np.max(np.abs(_projected_residual(mirrored))) < 1e-8

    def test_eigen_seed_mode_selection(self, problem: EquilibriumProblem):
        a_bar = refine_steady_state(problem, load_family("u1", problem.m))
        _, vector, phase_index = eigen_seed(problem, a_bar, mode=problem.m - 1)
        assert phase_index == problem.m - 1
        assert vector[phase_index] == pytest.approx(1.0)

    def test_divergence(self):
        problem = EquilibriumProblem(m=4)
        with pytest.raises(NoConvergenceError):
            newton_solve(problem, [1e300, 1e300])

    def test_iteration_limit_follows_settings(self, monkeypatch):
        monkeypatch.setattr(settings, "NEWTON_MAX_ITERATIONS", 0)
        problem = EquilibriumProblem(m=6)
        with pytest.raises(NoConvergenceError, match=r"within 0 steps"):
            refine_steady_state(problem, seed_from_lattice(U1_TAU, 6))

    def test_tolerance_follows_settings(self, monkeypatch):
        monkeypatch.setattr(settings, "NEWTON_TOLERANCE", 1e6)
        problem = EquilibriumProblem(m=6)
        seed = seed_from_lattice(U1_TAU, 6)
        np.testing.assert_array_equal(refine_steady_state(problem, seed), seed)


class TestValidation:
    def test_linearization_inverse(
        self, problem: EquilibriumProblem, candidate: CandidateTriple
    ):
        operators = build_linearization(candidate, problem)
        size = 2 * problem.m + 1
        assert operators.dagger.shape == (size, size)
        np.testing.assert_allclose(
            operators.dagger.mid @ operators.inverse, np.eye(size), atol=1e-10
        )

    def test_row_block_norm_tails(self):
        norms = row_block_norms(np.zeros((5, 5)), m=2, nu=1.0, tails=(0.25, 0.5))
        assert norms == pytest.approx([0.0, 0.25, 0.5], rel=1e-14, abs=1e-300)

    def test_radius(self, certificate: ValidationCertificate):
        assert certificate.r_star <= 1e-9
        assert certificate.bounds.Z0 + certificate.bounds.Z1 < 1
        assert certificate.wall_clock >= 0

    def test_component_bounds_match_global(
        self, problem: EquilibriumProblem, candidate: CandidateTriple
    ):
        operators = build_linearization(candidate, problem)
        y0, z0, z1, z2 = component_bounds(candidate, operators, problem)
        overall = bounds(candidate, operators, problem)
        assert all(values.shape == (3,) for values in (y0, z0, z1, z2))
        assert overall.Y0 == np.max(y0)
        assert overall.Z0 == np.max(z0)
        assert overall.Z1 == np.max(z1)
        assert overall.Z2 == np.max(z2)

    def test_component_radii(
        self, problem: EquilibriumProblem, certificate: ValidationCertificate
    ):
        radii = component_radii(certificate)
        operators = build_linearization(certificate.candidate, problem)
        y0 = component_bounds(certificate.candidate, operators, problem)[0]
        assert radii.shape == (3,)
        assert np.all(radii <= certificate.r_star)
        assert np.all(radii >= y0)

    def test_ball_contains_candidate(self, certificate: ValidationCertificate):
        ball = IntervalTriple.from_certificate(certificate)
        candidate = certificate.candidate
        assert bool(ball.lam.contains(candidate.lambda_bar))
        assert ball.a.tail == certificate.r_star
        assert ball.b.contains(CosineSeq.from_point(1.0, candidate.b_bar))

    def test_conjugate_validates(
        self, problem: EquilibriumProblem, candidate: CandidateTriple
    ):
        mirrored = validate_candidate(conjugate(candidate), problem)
        assert mirrored.r_star <= 1e-9
