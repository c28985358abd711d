"""Validated steady states and unstable eigenpairs of the Fourier system.

Cosine coefficients ``a`` of a steady state satisfy ``f₁(a) = μa + a*a = 0`` with
``μ_k = −k²ω²`` and ``ω = 2π``. An eigenpair ``(λ, b)`` of the linearization satisfies
``f₂(λ, a, b) = i(μb + 2a*b) − λb = 0``; a phase condition ``η(b) = b_{k*} − 1`` isolates
the eigenvector. The zero finding problem ``F = (η, f₁, f₂) = 0`` is solved with Newton's
method on a projection of ``m`` modes and validated with the radii polynomial in
``X = ℂ × ℓ¹_ν × ℓ¹_ν`` with norm ``max(|λ|, |a|_ν, |b|_ν)``.
"""

from __future__ import annotations

import logging
import time
from functools import lru_cache
from typing import Any, Callable

import attrs
import numpy as np
import yaml
from attrs import field, frozen
from attrs.validators import ge, instance_of

from nlscap import settings
from nlscap._implementers import implement_pretty_repr
from nlscap.interval import (
    PI,
    ComplexInterval,
    RealInterval,
    add_upper,
    div_upper,
    matmul,
    matmul_upper,
    mul_upper,
    sum_upper,
)
from nlscap.radii import RadiiBounds, validate
from nlscap.seqspace import (
    CosineSeq,
    conv,
    convolution_matrix,
    coefficient_norm_upper,
    op_norm_upper,
    psi_upper,
    weights,
    widen_zero_mode,
)

_LOGGER = logging.getLogger(__name__)

OMEGA = 2 * np.pi
_EPSILON = float(np.finfo(float).eps)
_STALL_FACTOR = 100.0


class NoConvergenceError(RuntimeError):
    """Newton's method did not reach the requested residual."""


def _check_modes(instance: Any, attribute: attrs.Attribute, value: int) -> None:
    if value < 2:  # noqa: PLR2004
        msg = f"Projection needs at least 2 Fourier modes, got {attribute.name}={value}"
        raise ValueError(msg)


@implement_pretty_repr
@frozen
class EquilibriumProblem:
    """Projection size and weight of the zero finding problem for ``F``."""

    m: int = field(validator=_check_modes)
    nu: float = field(default=settings.DEFAULT_NU, converter=float, validator=ge(1.0))

    @property
    def omega(self) -> float:
        return OMEGA

    @property
    def mu(self) -> np.ndarray:
        """Floating-point symbols ``μ_k = −k²ω²`` for ``k < m``."""
        k = np.arange(self.m)
        return -(k**2) * OMEGA**2


def mu_enclosure(size: int) -> RealInterval:
    """Rigorous enclosures of ``μ_k = −k²ω²`` for ``k < size``.

    >>> mu = mu_enclosure(3)
    >>> bool(mu[0].contains(0.0)), bool(mu[2].contains(-16 * np.pi**2))
    (True, True)
    """
    k = np.arange(size, dtype=float)
    return -((PI * 2.0).sqr() * (k * k))


def _as_complex_vector(value: Any) -> np.ndarray:
    array = np.asarray(value, dtype=complex)
    if array.ndim != 1:
        msg = f"Expected a one-dimensional coefficient array, got shape {array.shape}"
        raise ValueError(msg)
    return array


@implement_pretty_repr
@frozen(eq=False)
class CandidateTriple:
    """Approximate zero ``x̄ = (λ̄, ā, b̄)`` of the projected map."""

    lambda_bar: complex = field(converter=complex)
    a_bar: np.ndarray = field(converter=_as_complex_vector)
    b_bar: np.ndarray = field(converter=_as_complex_vector)
    phase_index: int = field(default=0, validator=ge(0))
    """Component ``k*`` fixed to one by the phase condition."""

    def __attrs_post_init__(self) -> None:
        if self.a_bar.shape != self.b_bar.shape:
            msg = (
                f"Steady state and eigenvector have different sizes: {self.a_bar.size}"
                f" and {self.b_bar.size}"
            )
            raise ValueError(msg)
        if self.phase_index >= self.b_bar.size:
            msg = f"Phase index {self.phase_index} exceeds the projection {self.b_bar.size}"
            raise ValueError(msg)

    @property
    def m(self) -> int:
        return self.a_bar.size

    def to_vector(self) -> np.ndarray:
        return np.concatenate([[self.lambda_bar], self.a_bar, self.b_bar])

    @classmethod
    def from_vector(cls, vector: np.ndarray, phase_index: int) -> CandidateTriple:
        m = (vector.size - 1) // 2
        return cls(vector[0], vector[1 : m + 1], vector[m + 1 :], phase_index)

    def phase_residual(self) -> complex:
        return complex(self.b_bar[self.phase_index] - 1)


@frozen(eq=False)
class IntervalTriple:
    """Enclosure of an element ``(λ, a, b)`` of X, or of a residual ``(η, f₁, f₂)``."""

    lam: ComplexInterval = field(validator=instance_of(ComplexInterval))
    a: CosineSeq = field(validator=instance_of(CosineSeq))
    b: CosineSeq = field(validator=instance_of(CosineSeq))
    phase_index: int = 0

    @classmethod
    def from_candidate(cls, candidate: CandidateTriple, nu: float) -> IntervalTriple:
        return cls(
            ComplexInterval.point(candidate.lambda_bar),
            CosineSeq.from_point(nu, candidate.a_bar),
            CosineSeq.from_point(nu, candidate.b_bar),
            candidate.phase_index,
        )

    @classmethod
    def from_certificate(cls, certificate: ValidationCertificate) -> IntervalTriple:
        """The validated ball: every component is within ``r_star`` of the candidate."""
        radius = certificate.r_star
        center = cls.from_candidate(certificate.candidate, certificate.problem.nu)
        return cls(
            center.lam.widen(radius),
            widen_zero_mode(center.a, radius).with_tail(radius),
            widen_zero_mode(center.b, radius).with_tail(radius),
            center.phase_index,
        )

    def conj(self) -> IntervalTriple:
        return IntervalTriple(-self.lam.conj(), self.a.conj(), self.b.conj(), self.phase_index)


def _projected_map(x: np.ndarray, mu: np.ndarray, phase_index: int) -> np.ndarray:
    m = mu.size
    lam, a, b = x[0], x[1 : m + 1], x[m + 1 :]
    conv_a = convolution_matrix(a, m)
    f1 = mu * a + conv_a @ a
    f2 = 1j * (mu * b + 2 * conv_a @ b) - lam * b
    return np.concatenate([[b[phase_index] - 1], f1, f2])


def _projected_jacobian(x: np.ndarray, mu: np.ndarray, phase_index: int) -> np.ndarray:
    m = mu.size
    lam, a, b = x[0], x[1 : m + 1], x[m + 1 :]
    jacobian = np.zeros((2 * m + 1, 2 * m + 1), dtype=complex)
    jacobian[0, m + 1 + phase_index] = 1
    linear_a = np.diag(mu) + 2 * convolution_matrix(a, m)
    jacobian[1 : m + 1, 1 : m + 1] = linear_a
    jacobian[m + 1 :, 0] = -b
    jacobian[m + 1 :, 1 : m + 1] = 2j * convolution_matrix(b, m)
    jacobian[m + 1 :, m + 1 :] = 1j * linear_a - lam * np.eye(m)
    return jacobian


def _residual_norm(residual: np.ndarray, mu: np.ndarray, nu: float) -> float:
    """Norm of ``F`` in its target space: each mode is scaled by ``1/max(1, |μ_k|)``."""
    m = mu.size
    scale = weights(nu, m).mid / np.maximum(1.0, np.abs(mu))
    norms = [
        abs(residual[0]),
        np.sum(np.abs(residual[1 : m + 1]) * scale),
        np.sum(np.abs(residual[m + 1 :]) * scale),
    ]
    return float(np.max(norms))


def newton(
    function: Callable[[np.ndarray], np.ndarray],
    jacobian: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    norm: Callable[[np.ndarray], float],
    description: str,
    *,
    tolerance: float | None = None,
    max_iterations: int | None = None,
) -> np.ndarray:
    """Newton's method until ``norm(function(x)) ≤ tolerance``.

    Iterates whose step has reached roundoff level are accepted once the residual is
    within a factor of the tolerance. Raises `NoConvergenceError` otherwise.
    """
    if tolerance is None:
        tolerance = settings.NEWTON_TOLERANCE
    if max_iterations is None:
        max_iterations = settings.NEWTON_MAX_ITERATIONS
    size = np.inf
    for iteration in range(max_iterations + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            residual = function(x)
            size = norm(residual)
        _LOGGER.debug(f"{description} Newton iteration {iteration}: |F| = {size:.3e}")
        if not np.isfinite(size):
            msg = f"{description} Newton iteration diverged after {iteration} steps"
            raise NoConvergenceError(msg)
        if size <= tolerance:
            return x
        if iteration == max_iterations:
            break
        try:
            step = np.linalg.solve(jacobian(x), residual)
        except np.linalg.LinAlgError as exc:
            msg = f"{description} Jacobian is singular at iteration {iteration}"
            raise NoConvergenceError(msg) from exc
        x = x - step
        stalled = np.max(np.abs(step)) <= 8 * _EPSILON * max(1.0, np.max(np.abs(x)))
        if stalled and size <= _STALL_FACTOR * tolerance:
            _LOGGER.debug(f"{description} Newton iteration stalled at roundoff level")
            return x
    msg = (
        f"{description} Newton iteration did not converge within"
        f" {max_iterations} steps (|F| = {size:.3e})"
    )
    raise NoConvergenceError(msg)


def refine_steady_state(problem: EquilibriumProblem, seed: Any) -> np.ndarray:
    """Newton's method for ``f₁ = 0`` on its own."""
    mu = problem.mu
    scale = weights(problem.nu, problem.m).mid / np.maximum(1.0, np.abs(mu))

    def function(a: np.ndarray) -> np.ndarray:
        return mu * a + convolution_matrix(a, problem.m) @ a

    def jacobian(a: np.ndarray) -> np.ndarray:
        return np.diag(mu) + 2 * convolution_matrix(a, problem.m)

    def norm(residual: np.ndarray) -> float:
        return float(np.sum(np.abs(residual) * scale))

    return newton(function, jacobian, _fit(seed, problem.m), norm, "Steady state")


def _fit(values: Any, m: int) -> np.ndarray:
    array = np.zeros(m, dtype=complex)
    values = np.asarray(values, dtype=complex).ravel()
    if values.size > m:
        _LOGGER.debug(f"Truncating seed of {values.size} coefficients to {m}")
    array[: min(m, values.size)] = values[:m]
    return array


def eigen_seed(
    problem: EquilibriumProblem, a_bar: np.ndarray, mode: int | None = None
) -> tuple[complex, np.ndarray, int]:
    """Eigenpair of ``i(diag μ + 2C(ā))`` and the index fixed by the phase condition.

    Without ``mode``, the eigenvalue with the largest real part is selected. With
    ``mode``, the eigenvector whose largest component sits at that Fourier index.
    """
    matrix = 1j * (np.diag(problem.mu) + 2 * convolution_matrix(a_bar, problem.m))
    eigenvalues, eigenvectors = np.linalg.eig(matrix)
    if mode is None:
        index = int(np.argmax(eigenvalues.real))
    else:
        dominant = np.argmax(np.abs(eigenvectors), axis=0)
        matches = np.flatnonzero(dominant == mode)
        if matches.size == 0:
            msg = f"No eigenvector concentrates on Fourier mode {mode}"
            raise NoConvergenceError(msg)
        index = int(matches[0])
    vector = eigenvectors[:, index]
    phase_index = int(np.argmax(np.abs(vector)))
    return complex(eigenvalues[index]), vector / vector[phase_index], phase_index


def newton_solve(
    problem: EquilibriumProblem,
    seed: Any,
    *,
    eigenpair: tuple[complex, Any] | None = None,
    mode: int | None = None,
) -> CandidateTriple:
    """Compute ``x̄`` with a small projected residual, starting from a steady-state seed.

    The eigenpair seed is computed from the refined steady state unless given.
    """
    a_bar = refine_steady_state(problem, seed)
    if eigenpair is None:
        lambda_bar, b_bar, phase_index = eigen_seed(problem, a_bar, mode)
    else:
        lambda_bar = complex(eigenpair[0])
        b_bar = _fit(eigenpair[1], problem.m)
        phase_index = int(np.argmax(np.abs(b_bar)))
        b_bar /= b_bar[phase_index]
    mu = problem.mu
    x = newton(
        lambda x: _projected_map(x, mu, phase_index),
        lambda x: _projected_jacobian(x, mu, phase_index),
        np.concatenate([[lambda_bar], a_bar, b_bar]),
        lambda residual: _residual_norm(residual, mu, problem.nu),
        "Eigenpair",
    )
    candidate = CandidateTriple.from_vector(x, phase_index)
    _LOGGER.info(
        f"Newton converged on m={problem.m} modes with λ ≈ {candidate.lambda_bar:.12g}"
    )
    return candidate


def conjugate(candidate: CandidateTriple) -> CandidateTriple:
    """Candidate for the conjugate steady state ``ā*`` with eigenpair ``(−λ̄*, b̄*)``."""
    return CandidateTriple(
        -np.conj(candidate.lambda_bar),
        np.conj(candidate.a_bar),
        np.conj(candidate.b_bar),
        candidate.phase_index,
    )


def assemble_F(x: IntervalTriple, problem: EquilibriumProblem) -> IntervalTriple:  # noqa: N802
    """Enclosure of ``F(x) = (η(b), f₁(a), f₂(λ, a, b))`` without truncation.

    The convolutions are kept in full, so the residual has ``2K + 1`` modes when ``a``
    and ``b`` have ``K + 1``. Tails are not admissible since ``μ`` is unbounded.
    """
    if x.a.tail > 0 or x.b.tail > 0:
        msg = "Residual of F needs finite sequences; μ is unbounded on tails"
        raise ValueError(msg)
    size = x.a.size + x.b.size - 1
    a, b = x.a.pad(size), x.b.pad(size)
    mu = mu_enclosure(size)
    square = conv(x.a, x.a).pad(size)
    product = conv(x.a, x.b).pad(size)
    f1 = CosineSeq(problem.nu, a.coeffs * mu + square.coeffs)
    f2_coeffs = (b.coeffs * mu + product.coeffs * 2.0) * 1j - b.coeffs * x.lam
    eta = x.b.coeffs[x.phase_index] - 1.0
    return IntervalTriple(eta, f1, CosineSeq(problem.nu, f2_coeffs), x.phase_index)


@frozen(eq=False)
class Linearization:
    """Finite blocks of ``A† ≈ DF(x̄)`` and ``A ≈ DF(x̄)^{-1}``.

    Beyond the projection both act diagonally: ``A†`` by ``μ_k`` on the steady-state
    component and by ``iμ_k`` on the eigenvector component, ``A`` by the reciprocals.
    """

    dagger: ComplexInterval
    """Rigorous enclosure of the Jacobian of the projected map."""
    inverse: np.ndarray
    """Floating-point approximate inverse."""


def _concatenate(parts: list[ComplexInterval]) -> ComplexInterval:
    def join(component: str, end: str) -> np.ndarray:
        return np.concatenate([
            np.atleast_1d(getattr(getattr(part, component), end)) for part in parts
        ])

    return ComplexInterval.from_rect(
        join("re", "lo"), join("re", "hi"), join("im", "lo"), join("im", "hi")
    )


def _stack(rows: list[list[ComplexInterval]]) -> ComplexInterval:
    def join(component: str, end: str) -> np.ndarray:
        return np.block([
            [getattr(getattr(block, component), end) for block in row] for row in rows
        ])

    return ComplexInterval.from_rect(
        join("re", "lo"), join("re", "hi"), join("im", "lo"), join("im", "hi")
    )


def interval_convolution_matrix(a: ComplexInterval, size: int) -> ComplexInterval:
    """Enclosure of `.convolution_matrix` for interval coefficients."""
    padding = 2 * size + 1 - min(a.size, 2 * size + 1)
    padded = _concatenate([a[: 2 * size + 1], ComplexInterval.zeros(padding)])
    k = np.arange(size)[:, None]
    j = np.arange(size)[None, :]
    column_factor = np.ones((size, size))
    column_factor[:, 0] = 0.5
    return (padded[np.abs(k - j)] + padded[k + j]) * column_factor


def _diagonal(values: RealInterval) -> ComplexInterval:
    return RealInterval(np.diag(values.lo), np.diag(values.hi)).to_complex()


def jacobian_enclosure(
    candidate: CandidateTriple, problem: EquilibriumProblem
) -> ComplexInterval:
    """Enclosure of the Jacobian ``DF^{(m)}(x̄)`` of the projected map."""
    m = problem.m
    lam = ComplexInterval.point(candidate.lambda_bar)
    conv_a = interval_convolution_matrix(ComplexInterval.point(candidate.a_bar), m)
    conv_b = interval_convolution_matrix(ComplexInterval.point(candidate.b_bar), m)
    linear_a = _diagonal(mu_enclosure(m)) + conv_a * 2.0
    phase_row = np.zeros((1, m))
    phase_row[0, candidate.phase_index] = 1
    return _stack([
        [
            ComplexInterval.zeros((1, 1)),
            ComplexInterval.zeros((1, m)),
            ComplexInterval.point(phase_row),
        ],
        [ComplexInterval.zeros((m, 1)), linear_a, ComplexInterval.zeros((m, m))],
        [
            -ComplexInterval.point(candidate.b_bar.reshape(m, 1)),
            conv_b * 2j,
            linear_a * 1j - lam * np.eye(m),
        ],
    ])


def build_linearization(
    candidate: CandidateTriple, problem: EquilibriumProblem
) -> Linearization:
    """Assemble ``A†`` rigorously and invert its midpoint numerically.

    Raises `numpy.linalg.LinAlgError` when the Jacobian cannot be inverted.
    """
    dagger = jacobian_enclosure(candidate, problem)
    return Linearization(dagger, np.linalg.inv(dagger.mid))


def _tail_factor(m: int) -> float:
    """Upper bound of ``1/(m²ω²) ≥ 1/|μ_k|`` for all ``k ≥ m``."""
    return float((1.0 / ((PI * 2.0).sqr() * float(m * m))).hi)


def row_block_norms(
    magnitudes: np.ndarray, m: int, nu: float, tails: tuple[float, float] = (0.0, 0.0)
) -> np.ndarray:
    """Upper bounds of the norms on X of the ``λ``, ``a`` and ``b`` row blocks.

    ``magnitudes`` bounds the moduli of the finite ``(2m+1) × (2m+1)`` part, ordered as
    ``(λ, a_0..a_{m−1}, b_0..b_{m−1})``. ``tails`` bound the diagonal action beyond the
    projection on the two sequence components. The operator norm is their maximum.

    >>> row_block_norms(np.eye(5), m=2, nu=1.0, tails=(0.5, 3.0)).round(12).tolist()
    [1.0, 1.0, 3.0]
    """
    w = weights(nu, m)
    scalar, first, second = slice(0, 1), slice(1, m + 1), slice(m + 1, 2 * m + 1)
    functional = max(
        np.max(div_upper(magnitudes[0, first], w.lo)),
        np.max(div_upper(magnitudes[0, second], w.lo)),
    )
    norms = [float(add_upper(magnitudes[0, 0], functional))]
    for row, tail in zip((first, second), tails):
        column = sum_upper(mul_upper(magnitudes[row, scalar][:, 0], w.hi))
        blocks = [
            op_norm_upper(magnitudes[row, first], nu),
            op_norm_upper(magnitudes[row, second], nu),
        ]
        diagonal = 0 if row is first else 1
        blocks[diagonal] = max(blocks[diagonal], tail)
        norms.append(float(add_upper(column, add_upper(*blocks))))
    return np.array(norms)


def _x_vector_components(
    magnitudes: np.ndarray, m: int, nu: float, tails: tuple[float, float]
) -> np.ndarray:
    w_hi = weights(nu, m).hi
    norm_a = add_upper(sum_upper(mul_upper(magnitudes[1 : m + 1], w_hi)), tails[0])
    norm_b = add_upper(sum_upper(mul_upper(magnitudes[m + 1 :], w_hi)), tails[1])
    return np.array([float(magnitudes[0]), float(norm_a), float(norm_b)])


def _tail_norm(values: ComplexInterval, divisor: ComplexInterval, nu: float, m: int) -> float:
    if values.size == 0:
        return 0.0
    quotients = (values / divisor).mag()
    w = weights(nu, m + values.size).hi[m:]
    return float(sum_upper(mul_upper(quotients, w)))


def component_bounds(
    candidate: CandidateTriple,
    operators: Linearization,
    problem: EquilibriumProblem,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """``Y0``, ``Z0``, ``Z1`` and ``Z2`` per row block ``(λ, a, b)`` of ``A``."""
    m, nu = problem.m, problem.nu
    inverse = ComplexInterval.point(operators.inverse)
    inverse_abs = inverse.mag()

    residual = assemble_F(IntervalTriple.from_candidate(candidate, nu), problem)
    finite = _concatenate([residual.lam, residual.a.coeffs[:m], residual.b.coeffs[:m]])
    image = matmul(inverse, finite.reshape(2 * m + 1, 1)).reshape(2 * m + 1)
    mu_tail = mu_enclosure(residual.a.size)[m:].to_complex()
    y_tails = (
        _tail_norm(residual.a.coeffs[m:], mu_tail, nu, m),
        _tail_norm(residual.b.coeffs[m:], mu_tail * 1j, nu, m),
    )
    y0 = _x_vector_components(image.mag(), m, nu, y_tails)

    identity = ComplexInterval.point(np.eye(2 * m + 1))
    defect = identity - matmul(inverse, operators.dagger)
    z0 = row_block_norms(defect.mag(), m, nu)

    psi_a = psi_upper(np.abs(candidate.a_bar), nu)
    psi_ab = add_upper(psi_a, psi_upper(np.abs(candidate.b_bar), nu))
    contributions = 2.0 * add_upper(
        matmul_upper(inverse_abs[:, 1 : m + 1], psi_a[:, None]),
        matmul_upper(inverse_abs[:, m + 1 :], psi_ab[:, None]),
    )[:, 0]
    norm_a = coefficient_norm_upper(CosineSeq.from_point(nu, candidate.a_bar))
    norm_b = coefficient_norm_upper(CosineSeq.from_point(nu, candidate.b_bar))
    lam_abs = float(ComplexInterval.point(candidate.lambda_bar).mag())
    factor = _tail_factor(m)
    tail_a = mul_upper(factor, 2 * norm_a)
    tail_b = mul_upper(factor, add_upper(add_upper(2 * norm_a, 2 * norm_b), lam_abs))
    z1 = _x_vector_components(contributions, m, nu, (float(tail_a), float(tail_b)))

    z2 = mul_upper(6.0, row_block_norms(inverse_abs, m, nu, (factor, factor)))
    return y0, z0, z1, z2


def bounds(
    candidate: CandidateTriple,
    operators: Linearization,
    problem: EquilibriumProblem,
) -> RadiiBounds:
    """Rigorous ``Y0``, ``Z0``, ``Z1`` and ``Z2`` for the candidate padded with zeros."""
    y0, z0, z1, z2 = (
        float(np.max(values)) for values in component_bounds(candidate, operators, problem)
    )
    result = RadiiBounds(Y0=y0, Z0=z0, Z1=z1, Z2=z2)
    _LOGGER.debug(f"Equilibrium bounds: {result}")
    return result


@implement_pretty_repr
@frozen(eq=False)
class ValidationCertificate:
    """Self-contained record of a validated steady state and eigenpair."""

    problem: EquilibriumProblem
    candidate: CandidateTriple
    bounds: RadiiBounds
    wall_clock: float = field(default=0.0, converter=float)
    parameters: dict[str, Any] = field(factory=dict)

    @property
    def r_star(self) -> float:
        if self.bounds.r_star is None:
            msg = "Certificate bounds carry no validated radius"
            raise ValueError(msg)
        return self.bounds.r_star


def component_radii(certificate: ValidationCertificate) -> np.ndarray:
    """Radii of the validated ball per component ``(λ, a, b)``, each at most ``r0``.

    Component ``c`` of ``x̃ − x̄ = −AF(x̄) + ∫(I − A DF(x̄ + te))(x̃ − x̄) dt`` is
    bounded by ``Y0_c + (Z0_c + Z1_c + Z2_c r0) r0``, for any approximate inverse ``A``.

    >>> problem = EquilibriumProblem(m=14)
    >>> certificate = prove_equilibrium(problem, load_family("u1", 14))
    >>> radii = component_radii(certificate)
    >>> bool(radii.max() <= certificate.r_star)
    True
    """
    problem, candidate = certificate.problem, certificate.candidate
    r0 = certificate.r_star
    try:
        operators = build_linearization(candidate, problem)
    except np.linalg.LinAlgError:
        _LOGGER.debug("Jacobian of the candidate is singular, using r0 for all components")
        return np.full(3, r0)
    y0, z0, z1, z2 = component_bounds(candidate, operators, problem)
    slopes = add_upper(add_upper(z0, z1), mul_upper(z2, r0))
    radii = add_upper(y0, mul_upper(slopes, r0))
    return np.minimum(radii, r0)


def validate_candidate(
    candidate: CandidateTriple, problem: EquilibriumProblem, **parameters: Any
) -> ValidationCertificate:
    """Run the radii polynomial test on ``candidate``; raises `.ValidationError`."""
    start = time.perf_counter()
    operators = build_linearization(candidate, problem)
    validated = validate(bounds(candidate, operators, problem))
    elapsed = time.perf_counter() - start
    _LOGGER.info(
        f"Validated equilibrium with r0 = {validated.r_star:.3e} on m={problem.m} modes"
        f" ({elapsed:.2f} s)"
    )
    return ValidationCertificate(problem, candidate, validated, elapsed, dict(parameters))


def prove_equilibrium(
    problem: EquilibriumProblem, seed: Any, *, mode: int | None = None
) -> ValidationCertificate:
    candidate = newton_solve(problem, seed, mode=mode)
    return validate_candidate(candidate, problem, mode=mode)


def seed_from_lattice(tau: complex, m: int, shift: float = 0.0) -> np.ndarray:
    """Cosine coefficients of ``−6℘(x + shift + τ/2)`` on the lattice ``ℤ + τℤ``.

    Only half-period shifts keep the profile even, so ``shift`` enters as a cosine factor.

    >>> a = seed_from_lattice(0.5 + 0.8660254037844386j, 4)
    >>> [round(float(abs(c)), 3) for c in a]
    [21.766, 15.526, 2.053, 0.203]
    """
    tau = complex(tau)
    if tau.imag <= 0:
        msg = f"Lattice parameter must lie in the upper half plane, got {tau}"
        raise ValueError(msg)
    half = np.exp(1j * np.pi * tau)
    q = half**2
    n = np.arange(1, 400)
    eisenstein = 1 - 24 * np.sum(n * q**n / (1 - q**n))
    k = np.arange(1, m)
    coefficients = np.empty(m, dtype=complex)
    coefficients[0] = 2 * np.pi**2 * eisenstein
    coefficients[1:] = 24 * np.pi**2 * k * half**k / (1 - q**k)
    if shift:
        coefficients *= np.cos(2 * np.pi * shift * np.arange(m))
    return coefficients


@lru_cache(maxsize=4)
def _load_families(path: str) -> dict[str, dict[str, Any]]:
    with open(path) as stream:
        definitions = yaml.load(stream, Loader=yaml.SafeLoader)
    return definitions["families"]


def family_names(path: str | None = None) -> list[str]:
    return sorted(_load_families(path or settings.EQUILIBRIA_DEFINITIONS_PATH))


def load_family(name: str, m: int, path: str | None = None) -> np.ndarray:
    """Seed coefficients of a named family from the shipped definitions."""
    families = _load_families(path or settings.EQUILIBRIA_DEFINITIONS_PATH)
    if name not in families:
        msg = f'Unknown equilibrium family "{name}", choose from {", ".join(sorted(families))}'
        raise KeyError(msg)
    entry = families[name]
    re, im = entry["tau"]
    coefficients = seed_from_lattice(complex(re, im), m, entry.get("shift", 0.0))
    if entry.get("conjugate", False):
        coefficients = np.conj(coefficients)
    return coefficients
