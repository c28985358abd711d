"""Parameterization of the strong unstable manifold of a validated steady state.

The manifold is the image of ``P(σ) = Σ_m p_m σ^m`` for ``|σ| ≤ 1``, where the
Taylor-Fourier coefficients ``p = (p_{k,m})`` solve

    p_0 = ã,   p_1 = c·b̃,   μ_{k,m} p_{k,m} = i (p *_TF p)_{k,m}   for m ≥ 2,

with ``μ_{k,m} = λ̃m + ik²ω²`` and ``c = αe^{iθ}`` scaling the eigenvector. The
coefficients are computed order by order and validated with the radii polynomial in
the space of Taylor sequences of ℓ¹_ν elements with norm ``Σ_{k,m} |p_{k,m}| ω_k``.

Unknowns are flattened Taylor order first: entry ``(m, k)`` sits at ``m(K+1) + k``.
"""

from __future__ import annotations

import logging
import time
from typing import Any

import attrs
import numpy as np
from attrs import field, frozen
from attrs.validators import ge, instance_of
from tqdm.auto import tqdm

from nlscap import settings
from nlscap._implementers import implement_pretty_repr
from nlscap.equilibria import CandidateTriple, ValidationCertificate, component_radii
from nlscap.interval import (
    PI,
    ComplexInterval,
    DomainError,
    RealInterval,
    add_upper,
    div_upper,
    matmul_upper,
    mul_upper,
    sqrt,
    sum_upper,
)
from nlscap.radii import RadiiBounds, validate
from nlscap.seqspace import (
    CosineSeq,
    convolution_matrix,
    convolve2d,
    convolve2d_enclosure,
    gamma_constant,
    psi_upper,
    symmetric_extension,
    weights,
    widen_zero_mode,
)

_LOGGER = logging.getLogger(__name__)


class ResonanceError(ZeroDivisionError):
    """A divisor ``μ_{k,m}`` of the recurrence is too close to zero."""


class AssumptionError(RuntimeError):
    """A hypothesis of the manifold bounds fails for the eigenvalue enclosure."""


def _check_taylor_order(instance: Any, attribute: attrs.Attribute, value: int) -> None:
    if value < 2:  # noqa: PLR2004
        msg = f"Taylor projection must be at least 2, got {attribute.name}={value}"
        raise ValueError(msg)


@implement_pretty_repr
@frozen
class ManifoldProblem:
    """Projection sizes and eigenvector scaling of the parameterization."""

    K: int = field(validator=ge(1))  # noqa: N815
    """Fourier projection."""
    M: int = field(validator=_check_taylor_order)  # noqa: N815
    """Taylor projection."""
    alpha_l2: float = field(default=20.0, converter=float, validator=ge(0.0))
    """Target L² norm of the scaled eigenvector profile."""
    theta: float = field(default=0.0, converter=float)
    nu: float = field(default=settings.DEFAULT_NU, converter=float, validator=ge(1.0))

    @property
    def size(self) -> int:
        return (self.K + 1) * (self.M + 1)


def l2_norm(b: np.ndarray) -> float:
    """L² norm over one period of the cosine series with coefficients ``b``.

    >>> l2_norm(np.array([3.0, 2.0]))
    4.123105625617661
    """
    b = np.asarray(b)
    return float(np.sqrt(abs(b[0]) ** 2 + 2 * np.sum(np.abs(b[1:]) ** 2)))


def eigen_scaling(b_bar: np.ndarray, alpha_l2: float, theta: float) -> complex:
    """Factor ``c = αe^{iθ}`` giving ``c·b̄`` the L² norm ``alpha_l2``."""
    norm = l2_norm(b_bar)
    if norm == 0:
        msg = "Cannot scale a vanishing eigenvector"
        raise ValueError(msg)
    return complex(alpha_l2 / norm * np.exp(1j * theta))


def _as_grid(value: Any) -> ComplexInterval:
    if isinstance(value, ComplexInterval):
        grid = value
    else:
        grid = ComplexInterval.point(np.asarray(value, dtype=complex))
    if grid.ndim != 2:  # noqa: PLR2004
        msg = f"Taylor-Fourier coefficients must form a grid (m, k), got shape {grid.shape}"
        raise ValueError(msg)
    return grid


def _as_tail(value: Any) -> float:
    tail = float(value)
    if not tail >= 0:
        msg = f"Tail bound must be nonnegative, got {tail}"
        raise ValueError(msg)
    return tail


@frozen(eq=False)
class TaylorFourierSeq:
    """Enclosure of a Taylor sequence of cosine sequences.

    ``coeffs[m, k]`` encloses ``p_{k,m}``. The represented set is ``{c + e}`` with ``c``
    in the grid and ``e`` any Taylor-Fourier sequence with ``‖e‖_ν ≤ tail``.
    """

    nu: float = field(converter=float, validator=ge(1.0))
    coeffs: ComplexInterval = field(converter=_as_grid)
    tail: float = field(default=0.0, converter=_as_tail)

    @classmethod
    def from_point(cls, nu: float, values: Any, tail: float = 0.0) -> TaylorFourierSeq:
        return cls(nu, ComplexInterval.point(np.asarray(values, dtype=complex)), tail)

    @property
    def K(self) -> int:  # noqa: N802
        return self.coeffs.shape[1] - 1

    @property
    def M(self) -> int:  # noqa: N802
        return self.coeffs.shape[0] - 1

    @property
    def mid(self) -> np.ndarray:
        return self.coeffs.mid

    def order(self, m: int) -> CosineSeq:
        """Taylor coefficient ``p_m`` as an element of ℓ¹_ν."""
        return CosineSeq(self.nu, self.coeffs[m])

    def norm_upper(self) -> float:
        """Upper bound of ``‖p‖_ν`` including the tail."""
        w = weights(self.nu, self.K + 1).hi
        total = sum_upper(mul_upper(self.coeffs.mag(), w[None, :]))
        return float(add_upper(total, self.tail))

    def rotate(self, theta: float) -> TaylorFourierSeq:
        """Coefficients of ``σ ↦ P(e^{iθ}σ)``, which scale ``p_m`` by ``e^{imθ}``."""
        factors = np.exp(1j * theta * np.arange(self.M + 1))[:, None]
        return TaylorFourierSeq(self.nu, self.coeffs * factors, self.tail)


def tf_conv(p: TaylorFourierSeq, q: TaylorFourierSeq) -> TaylorFourierSeq:
    """Enclosure of the Taylor-Fourier product ``(p *_TF q)_m = Σ_{ℓ≤m} p_ℓ * q_{m−ℓ}``.

    The output keeps Fourier indices up to ``K_p + K_q`` and Taylor orders up to
    ``M_p + M_q``. Products involving a tail enter the tail of the result through
    ``‖p *_TF q‖_ν ≤ ‖p‖_ν ‖q‖_ν``.
    """
    if p.nu != q.nu:
        msg = f"Sequences live in different spaces: ν = {p.nu} and ν = {q.nu}"
        raise ValueError(msg)
    product = convolve2d_enclosure(
        symmetric_extension(p.coeffs), symmetric_extension(q.coeffs)
    )
    coeffs = product[:, p.K + q.K :]
    finite_p = TaylorFourierSeq(p.nu, p.coeffs).norm_upper()
    finite_q = TaylorFourierSeq(q.nu, q.coeffs).norm_upper()
    cross = add_upper(
        add_upper(mul_upper(finite_p, q.tail), mul_upper(p.tail, finite_q)),
        mul_upper(p.tail, q.tail),
    )
    return TaylorFourierSeq(p.nu, coeffs, float(cross))


def mu_grid(lam: ComplexInterval, M: int, K: int) -> ComplexInterval:  # noqa: N803
    """Enclosures of ``μ_{k,m} = λm + ik²ω²`` for ``m ≤ M`` and ``k ≤ K``."""
    m = np.arange(M + 1, dtype=float)[:, None]
    k = np.arange(K + 1, dtype=float)[None, :]
    zeros = RealInterval.zeros((M + 1, K + 1))
    real = lam.re * m + zeros
    imag = lam.im * m + (PI * 2.0).sqr() * (k * k)
    return ComplexInterval(real, imag)


def _mu_point(lam: complex, M: int, K: int) -> np.ndarray:  # noqa: N803
    m = np.arange(M + 1)[:, None]
    k = np.arange(K + 1)[None, :]
    return lam * m + 1j * k**2 * (2 * np.pi) ** 2


def _fit(values: np.ndarray, size: int) -> np.ndarray:
    result = np.zeros(size, dtype=complex)
    result[: min(size, values.size)] = values[:size]
    return result


def solve_recurrence(candidate: CandidateTriple, problem: ManifoldProblem) -> TaylorFourierSeq:
    """Compute the point coefficients ``p̄`` order by order.

    Each order ``m ≥ 2`` solves

        (diag μ_{·,m} − 2iC(p̄_0)) p̄_m = i Σ_{0<ℓ<m} p̄_ℓ * p̄_{m−ℓ},

    where ``C(v)`` is the matrix of ``h ↦ v * h``,
    so the coefficients solve the projected problem up to rounding.

    Raises `ResonanceError` when a divisor of the recurrence nearly vanishes.
    """
    K, M = problem.K, problem.M  # noqa: N806
    mu = _mu_point(candidate.lambda_bar, M, K)
    smallest = float(np.min(np.abs(mu[2:])))
    if smallest < settings.RESONANCE_THRESHOLD:
        index = np.unravel_index(np.argmin(np.abs(mu[2:])), mu[2:].shape)
        msg = (
            f"Resonant divisor |μ| = {smallest:.3e} at k={index[1]}, m={index[0] + 2}"
            f" for λ = {candidate.lambda_bar}"
        )
        raise ResonanceError(msg)
    scale = eigen_scaling(candidate.b_bar, problem.alpha_l2, problem.theta)
    p = np.zeros((M + 1, K + 1), dtype=complex)
    p[0] = _fit(candidate.a_bar, K + 1)
    p[1] = scale * _fit(candidate.b_bar, K + 1)
    convolutions = np.zeros((M + 1, K + 1, K + 1), dtype=complex)
    convolutions[0] = convolution_matrix(p[0], K + 1)
    convolutions[1] = convolution_matrix(p[1], K + 1)
    for m in range(2, M + 1):
        source = np.einsum("lij,lj->i", convolutions[1:m], p[m - 1 : 0 : -1])
        diagonal = np.diag(mu[m]) - 2j * convolutions[0]
        try:
            p[m] = np.linalg.solve(diagonal, 1j * source)
        except np.linalg.LinAlgError as exc:
            msg = f"Order {m} of the recurrence is singular"
            raise ResonanceError(msg) from exc
        convolutions[m] = convolution_matrix(p[m], K + 1)
    _LOGGER.debug(
        f"Recurrence on K={K}, M={M}: |p̄_M|_ν ≈ {np.sum(np.abs(p[M])):.3e},"
        f" residual ≈ {finite_residual_norm(p, candidate, problem):.3e}"
    )
    return TaylorFourierSeq.from_point(problem.nu, p)


def finite_residual(
    p_bar: np.ndarray, candidate: CandidateTriple, problem: ManifoldProblem
) -> np.ndarray:
    """Floating-point ``f^{(K,M)}(p̄)`` for the candidate eigenpair."""
    K, M = problem.K, problem.M  # noqa: N806
    scale = eigen_scaling(candidate.b_bar, problem.alpha_l2, problem.theta)
    square = convolve2d(symmetric_extension(p_bar), symmetric_extension(p_bar))
    square = square[: M + 1, 2 * K : 3 * K + 1]
    residual = _mu_point(candidate.lambda_bar, M, K) * p_bar - 1j * square
    residual[0] = p_bar[0] - _fit(candidate.a_bar, K + 1)
    residual[1] = p_bar[1] - scale * _fit(candidate.b_bar, K + 1)
    return residual


def finite_residual_norm(
    p_bar: np.ndarray, candidate: CandidateTriple, problem: ManifoldProblem
) -> float:
    """Weighted norm of the residual with orders ``m ≥ 2`` divided by ``|μ_{k,m}|``."""
    residual = finite_residual(p_bar, candidate, problem)
    mu = np.abs(_mu_point(candidate.lambda_bar, problem.M, problem.K))
    mu[:2] = 1.0
    w = weights(problem.nu, problem.K + 1).mid
    return float(np.sum(np.abs(residual) / mu * w[None, :]))


@frozen(eq=False)
class ManifoldOperators:
    """Finite part of ``A ≈ Df(p̄)^{-1}`` and the data generating ``A†``.

    ``A†`` equals ``Df^{(K,M)}(p̄)`` on the projection and acts beyond it as the
    identity on orders 0 and 1 and by ``μ_{k,m}`` on all other entries. ``A`` is the
    block lower-triangular inverse of the finite part, extended by the reciprocal
    diagonal actions.
    """

    lam: ComplexInterval
    """Enclosure of the validated eigenvalue λ̃."""
    mu: ComplexInterval
    """Enclosures of ``μ_{k,m}`` on the projection."""
    convolutions: np.ndarray
    """Matrices ``C(p̄_ℓ)`` of ``h ↦ p̄_ℓ * h`` on the first ``K+1`` modes."""
    inverse: np.ndarray
    magnitudes: np.ndarray
    """Entrywise upper bounds of ``|Re A| + |Im A|``."""
    nu: float

    def apply(self, vector: ComplexInterval, start: int = 0) -> ComplexInterval:
        """Enclosure of ``A[start:, start:] @ vector`` in midpoint-radius form."""
        inverse = self.inverse[start:, start:]
        absolute = self.magnitudes[start:, start:]
        center_b, radius_b = vector.midrad()
        abs_b = add_upper(np.abs(center_b.real), np.abs(center_b.imag))
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            center = inverse @ center_b
        rounding = mul_upper(
            matmul_upper(absolute, abs_b), 2 * gamma_constant(2 * inverse.shape[-1] + 2)
        )
        radius = add_upper(rounding, matmul_upper(absolute, radius_b))
        return ComplexInterval.from_midrad(center, radius)

    @property
    def K(self) -> int:  # noqa: N802
        return self.convolutions.shape[1] - 1

    @property
    def M(self) -> int:  # noqa: N802
        return self.convolutions.shape[0] - 1

    def dagger_column(self, m: int) -> ComplexInterval:
        """Blocks ``A†_{ℓ,m}`` for ``ℓ = m..M`` stacked vertically."""
        K, M = self.K, self.M  # noqa: N806
        blocks = np.zeros((M + 1 - m, K + 1, K + 1), dtype=complex)
        if m <= 1:
            blocks[0] = np.eye(K + 1)
        for ell in range(max(m, 2), M + 1):
            blocks[ell - m] -= 2j * self.convolutions[ell - m]
        column = ComplexInterval.point(blocks.reshape((M + 1 - m) * (K + 1), K + 1))
        if m < 2:  # noqa: PLR2004
            return column
        diagonal = np.arange(K + 1)
        re_lo, re_hi = np.array(column.re.lo), np.array(column.re.hi)
        im_lo, im_hi = np.array(column.im.lo), np.array(column.im.hi)
        shift = ComplexInterval(self.mu.re[m], self.mu.im[m]) + column[diagonal, diagonal]
        re_lo[diagonal, diagonal], re_hi[diagonal, diagonal] = shift.re.lo, shift.re.hi
        im_lo[diagonal, diagonal], im_hi[diagonal, diagonal] = shift.im.lo, shift.im.hi
        return ComplexInterval.from_rect(re_lo, re_hi, im_lo, im_hi)


def _eigenvalue_enclosure(equilibrium: ValidationCertificate) -> ComplexInterval:
    r_lambda = float(component_radii(equilibrium)[0])
    return ComplexInterval.point(equilibrium.candidate.lambda_bar).widen(r_lambda)


def build_operators(
    p_bar: TaylorFourierSeq, equilibrium: ValidationCertificate
) -> ManifoldOperators:
    """Assemble ``A†`` and invert its midpoint by block forward substitution."""
    K, M = p_bar.K, p_bar.M  # noqa: N806
    lam = _eigenvalue_enclosure(equilibrium)
    mu = mu_grid(lam, M, K)
    points = p_bar.mid
    convolutions = np.stack([convolution_matrix(points[ell], K + 1) for ell in range(M + 1)])
    size = K + 1
    n = (M + 1) * size
    inverse = np.zeros((n, n), dtype=complex)
    inverse[: 2 * size, : 2 * size] = np.eye(2 * size)
    mu_mid = mu.mid
    for j in range(2, M + 1):
        rows = slice(j * size, (j + 1) * size)
        diagonal = np.diag(mu_mid[j]) - 2j * convolutions[0]
        try:
            diagonal_inverse = np.linalg.inv(diagonal)
        except np.linalg.LinAlgError as exc:
            msg = f"Diagonal block of order {j} is singular"
            raise ResonanceError(msg) from exc
        row = np.hstack([-2j * convolutions[j - ell] for ell in range(j)])
        inverse[rows, : j * size] = -diagonal_inverse @ (
            row @ inverse[: j * size, : j * size]
        )
        inverse[rows, rows] = diagonal_inverse
    magnitudes = add_upper(np.abs(inverse.real), np.abs(inverse.imag))
    return ManifoldOperators(lam, mu, convolutions, inverse, magnitudes, p_bar.nu)


def mu_star(lam: ComplexInterval, K: int, M: int) -> float:  # noqa: N803
    """Lower bound of ``min_m |λ̃m + i(K+1)²ω²|`` over ``m ≤ M``.

    Raises `AssumptionError` unless ``Re λ̃ > 0`` and ``Im λ̃·m + (K+1)²ω² > 0`` for
    all ``m ≤ M``.
    """
    if float(lam.re.lo) <= 0:
        msg = f"Eigenvalue is not in the right half plane: Re λ ≥ {float(lam.re.lo)}"
        raise AssumptionError(msg)
    m = np.arange(M + 1, dtype=float)
    shifted = lam.im * m + (PI * 2.0).sqr() * float((K + 1) ** 2)
    if float(np.min(shifted.lo)) <= 0:
        msg = (
            f"Fourier projection K={K} is too small for Im λ = {float(lam.im.mid):.6g}:"
            " the tail divisors are not bounded away from zero"
        )
        raise AssumptionError(msg)
    modulus = sqrt((lam.re * m).sqr() + shifted.sqr())
    return float(np.min(modulus.lo))


def _block_norms(magnitudes: np.ndarray, nu: float) -> np.ndarray:
    """Upper bounds of the ℓ¹_ν operator norms of blocks ``magnitudes[j, :, m, :]``."""
    w = weights(nu, magnitudes.shape[1])
    columns = sum_upper(mul_upper(magnitudes, w.hi[None, :, None, None]), axis=1)
    return np.max(div_upper(columns, w.lo[None, None, :]), axis=-1)


def _modulus_upper(z: complex) -> float:
    return float(np.nextafter(np.nextafter(abs(z), np.inf), np.inf))


def _decay_floor(lam: ComplexInterval, order: int) -> float:
    """Lower bound of ``Re λ̃ · order``."""
    return float((lam.re * float(order)).lo)


def inverse_column_norms(operators: ManifoldOperators, tail_bound: float) -> np.ndarray:
    """``α_m = Σ_j ‖A_{j,m}‖`` for ``m ≤ M`` including the diagonal tail actions.

    ``tail_bound`` bounds ``1/|μ_{k,m}|`` for ``k > K`` and ``2 ≤ m ≤ M``.
    """
    K, M = operators.K, operators.M  # noqa: N806
    blocks = operators.magnitudes.reshape(M + 1, K + 1, M + 1, K + 1)
    norms = _block_norms(blocks, operators.nu)
    tails = np.full(M + 1, tail_bound)
    tails[:2] = 1.0
    diagonal = np.arange(M + 1)
    norms[diagonal, diagonal] = np.maximum(norms[diagonal, diagonal], tails)
    return sum_upper(norms, axis=0)


def _spill_norm(values: np.ndarray, start: int, nu: float) -> float:
    """Weighted norm of the modes ``k ≥ start`` of a float sequence."""
    spill = np.abs(values[start:])
    if not spill.size:
        return 0.0
    w = weights(nu, values.size).hi[start:]
    return float(sum_upper(mul_upper(spill, w)))


def bound_Y0(  # noqa: N802
    p_bar: TaylorFourierSeq,
    operators: ManifoldOperators,
    equilibrium: ValidationCertificate,
    scale: complex,
    column_norms: np.ndarray,
) -> float:
    """Upper bound of ``‖A f(p̄)‖_ν`` for the true eigendata within `.component_radii`."""
    K, M = p_bar.K, p_bar.M  # noqa: N806
    nu = p_bar.nu
    candidate = equilibrium.candidate
    w = weights(nu, 2 * K + 1).hi
    alpha = _modulus_upper(scale)

    square = tf_conv(p_bar, p_bar)
    residual = operators.mu * p_bar.coeffs - square.coeffs[: M + 1, : K + 1] * 1j
    b_scaled = ComplexInterval.point(_fit(candidate.b_bar, K + 1)) * scale
    first_order = p_bar.coeffs[1] - b_scaled
    residual = _replace_rows(residual, [ComplexInterval.zeros(K + 1), first_order])
    image = operators.apply(residual.reshape(-1, 1))
    finite = sum_upper(mul_upper(image.mag().reshape(M + 1, K + 1), w[None, : K + 1]))

    constraint_spill = add_upper(
        _spill_norm(candidate.a_bar, K + 1, nu),
        mul_upper(alpha, _spill_norm(candidate.b_bar, K + 1, nu)),
    )
    mu_full = mu_grid(operators.lam, 2 * M, 2 * K)
    with np.errstate(over="ignore", under="ignore"):
        quotients = (square.coeffs[2:] / mu_full[2:]).mag()
    fourier_spill = sum_upper(mul_upper(quotients[: M - 1, K + 1 :], w[None, K + 1 :]))
    taylor_spill = sum_upper(mul_upper(quotients[M - 1 :], w[None, :]))
    y0_truncation = add_upper(
        add_upper(finite, constraint_spill), add_upper(fourier_spill, taylor_spill)
    )

    _, r_a, r_b = component_radii(equilibrium)
    y0_eigendata = add_upper(
        mul_upper(column_norms[0], r_a), mul_upper(mul_upper(alpha, column_norms[1]), r_b)
    )
    _LOGGER.debug(f"Y0 splits into {float(y0_truncation):.3e} + {float(y0_eigendata):.3e}")
    return float(add_upper(y0_truncation, y0_eigendata))


def _replace_rows(grid: ComplexInterval, rows: list[ComplexInterval]) -> ComplexInterval:
    re_lo, re_hi = np.array(grid.re.lo), np.array(grid.re.hi)
    im_lo, im_hi = np.array(grid.im.lo), np.array(grid.im.hi)
    for index, row in enumerate(rows):
        re_lo[index], re_hi[index] = row.re.lo, row.re.hi
        im_lo[index], im_hi[index] = row.im.lo, row.im.hi
    return ComplexInterval.from_rect(re_lo, re_hi, im_lo, im_hi)


def bound_Z0(operators: ManifoldOperators) -> float:  # noqa: N802
    """Upper bound of ``max_m Σ_j ‖(I − A A†)_{j,m}‖``."""
    K, M = operators.K, operators.M  # noqa: N806
    size = K + 1
    worst = 0.0
    columns = tqdm(
        range(M + 1),
        desc="Z0 column blocks",
        disable=_LOGGER.level > logging.WARNING,
    )
    for m in columns:
        product = operators.apply(operators.dagger_column(m), start=m * size)
        identity = np.zeros(product.shape)
        identity[:size] = np.eye(size)
        defect = (ComplexInterval.point(identity) - product).mag()
        norms = _block_norms(defect.reshape(M + 1 - m, size, 1, size), operators.nu)
        worst = max(worst, float(sum_upper(norms)))
    return worst


def bound_Z1(  # noqa: N802
    p_bar: TaylorFourierSeq, operators: ManifoldOperators, tail_bound: float
) -> float:
    """Upper bound of ``‖A(A† − Df(p̄))‖``; ``tail_bound`` is ``1/μ*(λ̃)``."""
    K, M = p_bar.K, p_bar.M  # noqa: N806
    psi = psi_upper(p_bar.coeffs.mag(), p_bar.nu)
    # ‖h‖ ≤ 1 sums over all orders: order m sees at most max_{ℓ≤m} Ψ_k(p̄_ℓ)
    z_hat = 2.0 * np.maximum.accumulate(psi, axis=0)
    z_hat[:2] = 0.0
    image = matmul_upper(operators.magnitudes, z_hat.reshape(-1, 1)).reshape(M + 1, K + 1)
    w = weights(p_bar.nu, K + 1).hi
    finite = sum_upper(mul_upper(image, w[None, :]))
    norm = p_bar.norm_upper()
    fourier_tail = mul_upper(2 * norm, tail_bound)
    taylor_tail = div_upper(2 * norm, _decay_floor(operators.lam, M + 1))
    return float(add_upper(finite, add_upper(fourier_tail, taylor_tail)))


def bound_Z2(operators: ManifoldOperators, column_norms: np.ndarray) -> float:  # noqa: N802
    """``2‖A‖`` with ``‖A‖ ≤ max(max_m α_m, 1/(Re λ̃ (M+1)))``."""
    beyond = div_upper(1.0, _decay_floor(operators.lam, operators.M + 1))
    return float(mul_upper(2.0, max(float(np.max(column_norms)), float(beyond))))


@implement_pretty_repr
@frozen(eq=False)
class ManifoldCertificate:
    """Validated parameterization: the true coefficients lie within ``r_p`` of ``p_bar``."""

    problem: ManifoldProblem
    equilibrium: ValidationCertificate
    p_bar: TaylorFourierSeq = field(validator=instance_of(TaylorFourierSeq))
    scale: complex = field(converter=complex)
    bounds: RadiiBounds
    wall_clock: float = field(default=0.0, converter=float)

    @property
    def r_p(self) -> float:
        if self.bounds.r_star is None:
            msg = "Manifold bounds carry no validated radius"
            raise ValueError(msg)
        return self.bounds.r_star

    @property
    def alpha(self) -> float:
        return abs(self.scale)

    @property
    def theta(self) -> float:
        return self.problem.theta


def manifold_bounds(
    p_bar: TaylorFourierSeq,
    operators: ManifoldOperators,
    equilibrium: ValidationCertificate,
    scale: complex,
) -> RadiiBounds:
    tail_bound = float(div_upper(1.0, mu_star(operators.lam, operators.K, operators.M)))
    column_norms = inverse_column_norms(operators, tail_bound)
    bounds = RadiiBounds(
        Y0=bound_Y0(p_bar, operators, equilibrium, scale, column_norms),
        Z0=bound_Z0(operators),
        Z1=bound_Z1(p_bar, operators, tail_bound),
        Z2=bound_Z2(operators, column_norms),
    )
    _LOGGER.debug(f"Manifold bounds: {bounds}")
    return bounds


def validate_manifold(
    equilibrium: ValidationCertificate, problem: ManifoldProblem
) -> ManifoldCertificate:
    """Compute ``p̄`` and validate it; raises `.ValidationError` or `AssumptionError`."""
    start = time.perf_counter()
    candidate = equilibrium.candidate
    p_bar = solve_recurrence(candidate, problem)
    operators = build_operators(p_bar, equilibrium)
    scale = eigen_scaling(candidate.b_bar, problem.alpha_l2, problem.theta)
    bounds = validate(manifold_bounds(p_bar, operators, equilibrium, scale))
    elapsed = time.perf_counter() - start
    _LOGGER.info(
        f"Validated manifold with r_p = {bounds.r_star:.3e} on K={problem.K}, M={problem.M}"
        f" ({elapsed:.1f} s)"
    )
    return ManifoldCertificate(problem, equilibrium, p_bar, scale, bounds, elapsed)


def eval_P(  # noqa: N802
    certificate: ManifoldCertificate,
    p_bar: TaylorFourierSeq | None,
    sigma: Any,
) -> CosineSeq:
    """Enclosure of ``P̃(σ)`` for ``|σ| ≤ 1``, the validation error folded in.

    Without ``p_bar`` the coefficients stored on the certificate are used.
    """
    p_bar = certificate.p_bar if p_bar is None else p_bar
    sigma = sigma if isinstance(sigma, ComplexInterval) else ComplexInterval.point(sigma)
    modulus = float(np.max(sigma.mag()))
    if modulus > 1:
        msg = f"Parameter σ must lie in the closed unit disk, got |σ| ≤ {modulus:.17g}"
        raise DomainError(msg)
    value = p_bar.coeffs[p_bar.M]
    for m in range(p_bar.M - 1, -1, -1):
        value = value * sigma + p_bar.coeffs[m]
    error = float(add_upper(certificate.r_p, p_bar.tail))
    return widen_zero_mode(CosineSeq(p_bar.nu, value), error).with_tail(error)


def orbit_on_manifold(
    certificate: ManifoldCertificate, sigma0: complex, t: float
) -> np.ndarray:
    """Midpoint coefficients of ``a(t) = P(e^{λ̄t}σ₀)``, the orbit through ``P(σ₀)``."""
    sigma = np.exp(certificate.equilibrium.candidate.lambda_bar * t) * sigma0
    if abs(sigma) > 1:
        msg = f"Time t={t} leaves the parameter disk: |σ| = {abs(sigma):.3e}"
        raise DomainError(msg)
    powers = sigma ** np.arange(certificate.p_bar.M + 1)
    return powers @ certificate.p_bar.mid
