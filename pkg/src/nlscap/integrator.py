"""Rigorous forward integration of the Fourier system ``ȧ = i(La + a*a)``.

Each time step ``J = [t₀, t₀ + h]`` carries a Chebyshev-in-time, Fourier-in-space
approximation ``ā``. The linearization around ``ā`` is split into the zero mode and the
remaining modes: the zero mode is bounded through its scalar fundamental solution
(`compute_W0`), the other modes through the exponential estimates of `tail_constants`.
Together they form the 2×2 matrix ``U_h`` of `build_Uh`, and `local_inclusion` finds
tube radii ``(ϱ₀, ϱ∞)`` around ``ā`` that contain the true solution.
`time_march` chains steps, carrying the endpoint enclosure of one step over as the
initial data of the next.
"""

from __future__ import annotations

import logging
import time
import warnings
from typing import Any, Callable, Sequence

import numpy as np
from attrs import field, frozen
from attrs.validators import ge, gt, instance_of
from scipy.integrate import solve_ivp
from tqdm.auto import tqdm

from nlscap import chebyshev, settings
from nlscap._implementers import implement_pretty_repr
from nlscap.equilibria import OMEGA, NoConvergenceError, mu_enclosure, newton
from nlscap.interval import (
    ComplexInterval,
    RealInterval,
    add_upper,
    exp,
    matmul,
    mul_upper,
    sum_upper,
)
from nlscap.seqspace import CosineSeq, convolution_matrix, weights, widen_zero_mode

_LOGGER = logging.getLogger(__name__)

_SERIES_TERMS = 24
_LARGE_STEP = 0.1
_RADIUS_CEILING = 1e100
_REFINEMENTS = 8


class StepSizeError(RuntimeError):
    """The collocation solve failed; a smaller step size may help."""


class W0Error(RuntimeError):
    """The zero-mode fundamental solution could not be enclosed."""


class KappaError(RuntimeError):
    """The coupling between zero mode and tail is too strong for the step."""


class InclusionError(RuntimeError):
    """No tube radii satisfy the inclusion inequalities."""


class StepFailure(RuntimeError):
    """A time step could not be certified.

    Carries the index of the failing step and the steps certified before it.
    """

    def __init__(self, message: str, step: int, steps: list[StepCertificate]) -> None:
        super().__init__(message)
        self.step = step
        self.steps = steps


def _as_coefficient_grid(value: Any) -> np.ndarray:
    grid = np.array(value, dtype=complex)
    if grid.ndim != 2:  # noqa: PLR2004
        msg = f"Chebyshev-Fourier coefficients need a grid, got shape {grid.shape}"
        raise ValueError(msg)
    return grid


@frozen(eq=False)
class ChebFourierSolution:
    """Point approximation ``ā_k(t) = Σ_n ā_{n,k} T_n(2(t − t₀)/h − 1)``."""

    h: float = field(converter=float, validator=gt(0.0))
    coeffs: np.ndarray = field(converter=_as_coefficient_grid)
    t0: float = field(default=0.0, converter=float)
    nu: float = field(default=settings.DEFAULT_NU, converter=float, validator=ge(1.0))

    @property
    def N(self) -> int:  # noqa: N802
        return self.coeffs.shape[0]

    @property
    def K(self) -> int:  # noqa: N802
        return self.coeffs.shape[1] - 1

    @property
    def t_end(self) -> float:
        return self.t0 + self.h

    def enclosure(self) -> ComplexInterval:
        return ComplexInterval.point(self.coeffs)

    def __call__(self, t: Any) -> np.ndarray:
        """Cosine coefficients at the times ``t``, one row per time."""
        xi = 2 * (np.atleast_1d(np.asarray(t, dtype=float)) - self.t0) / self.h - 1
        return chebyshev.basis(xi, self.N) @ self.coeffs

    def initial(self) -> ComplexInterval:
        return chebyshev.at_endpoints(self.enclosure())[0]

    def endpoint(self) -> ComplexInterval:
        return chebyshev.at_endpoints(self.enclosure())[1]

    def mode_sums(self) -> np.ndarray:
        """Upper bounds of ``Σ_n |ā_{n,k}| ≥ sup_J |ā_k(t)|``."""
        return sum_upper(self.enclosure().mag(), axis=0)

    def norm_upper(self) -> float:
        """Upper bound of ``‖ā‖_X = sup_J ‖ā(t)‖_ν``."""
        w = weights(self.nu, self.K + 1).hi
        return float(sum_upper(mul_upper(self.mode_sums(), w)))

    def tail_norm_upper(self) -> float:
        """Upper bound of ``‖ā^{(∞)}‖_X``, the norm without the zero mode."""
        w = weights(self.nu, self.K + 1).hi
        return float(sum_upper(mul_upper(self.mode_sums()[1:], w[1:])))

    def tail_dual_upper(self) -> float:
        """Upper bound of ``sup_J sup_{k≠0} |ā_k(t)| ν^{−|k|}``."""
        if self.K == 0:
            return 0.0
        halves = (RealInterval.point(2.0) / weights(self.nu, self.K + 1)).hi
        return float(np.max(mul_upper(self.mode_sums()[1:], halves[1:])))


def _fit(values: Any, size: int) -> np.ndarray:
    array = np.zeros(size, dtype=complex)
    values = np.asarray(values, dtype=complex).ravel()
    array[: min(size, values.size)] = values[:size]
    return array


def _midpoint_data(phi: CosineSeq | Any) -> np.ndarray:
    if isinstance(phi, CosineSeq):
        return phi.mid
    return np.asarray(phi, dtype=complex)


def approx_step(
    phi: CosineSeq | Any,
    h: float,
    N: int,  # noqa: N803
    K: int,  # noqa: N803
    *,
    t0: float = 0.0,
    nu: float = settings.DEFAULT_NU,
) -> ChebFourierSolution:
    """Chebyshev collocation of the Galerkin system on ``[t₀, t₀ + h]``.

    The initial condition ``Σ_n (−1)^n ā_n = φ̄`` is imposed together with the equation
    at the ``N − 1`` Chebyshev points of the step. The equation rows are scaled by
    ``h/2`` so that the residual is measured in coefficient units.
    """
    size = K + 1
    phi_bar = _fit(_midpoint_data(phi), size)
    xi = chebyshev.nodes(N - 1)
    values = chebyshev.basis(xi, N)
    derivative = values @ chebyshev.derivative_matrix(N)
    symbols = -(np.arange(size) ** 2) * OMEGA**2
    half_step = 0.5 * h
    start = (-1.0) ** np.arange(N)
    w = weights(nu, size).mid

    def function(x: np.ndarray) -> np.ndarray:
        grid = x.reshape(N, size)
        at_nodes = values @ grid
        squares = np.array([convolution_matrix(u, size) @ u for u in at_nodes])
        rhs = 1j * (symbols * at_nodes + squares)
        equations = derivative @ grid - half_step * rhs
        return np.concatenate([start @ grid - phi_bar, equations.ravel()])

    def jacobian(x: np.ndarray) -> np.ndarray:
        grid = x.reshape(N, size)
        at_nodes = values @ grid
        rows = [np.kron(start, np.eye(size))]
        for j, u in enumerate(at_nodes):
            linear = np.diag(symbols) + 2 * convolution_matrix(u, size)
            rows.append(
                np.kron(derivative[j], np.eye(size))
                - half_step * 1j * np.kron(values[j], linear)
            )
        return np.vstack(rows)

    def norm(residual: np.ndarray) -> float:
        blocks = np.abs(residual.reshape(N, size))
        return float(np.max(blocks @ w))

    guess = np.zeros((N, size), dtype=complex)
    guess[0] = phi_bar
    try:
        solution = newton(
            function,
            jacobian,
            guess.ravel(),
            norm,
            description="Collocation",
            tolerance=settings.COLLOCATION_TOLERANCE,
            max_iterations=settings.COLLOCATION_MAX_ITERATIONS,
        )
    except NoConvergenceError as exc:
        msg = f"Collocation failed for h = {h:.3e} at t = {t0:.6g}; try a smaller step"
        raise StepSizeError(msg) from exc
    return ChebFourierSolution(h, solution.reshape(N, size), t0, nu)


def _pad(grid: ComplexInterval, shape: tuple[int, int]) -> ComplexInterval:
    extra = [(0, shape[0] - grid.shape[0]), (0, shape[1] - grid.shape[1])]

    def pad(values: np.ndarray) -> np.ndarray:
        return np.pad(values, extra)

    return ComplexInterval.from_rect(
        pad(grid.re.lo), pad(grid.re.hi), pad(grid.im.lo), pad(grid.im.hi)
    )


def defect_grid(abar: ChebFourierSolution) -> ComplexInterval:
    """Chebyshev-Fourier coefficients of ``F(ā) = ā' − i(Lā + ā*ā)``, all of them."""
    coeffs = abar.enclosure()
    step_scale = RealInterval.point(2.0) / abar.h
    derivative = matmul(
        ComplexInterval.point(chebyshev.derivative_matrix(abar.N)), coeffs
    )
    linear = coeffs * mu_enclosure(abar.K + 1).reshape(1, -1)
    square = chebyshev.product(coeffs, coeffs)
    shape = square.shape
    rhs = _pad(linear, shape) + square
    return _pad(derivative * step_scale, shape) - rhs * 1j


def defect(abar: ChebFourierSolution) -> tuple[float, float]:
    """Upper bounds ``(δ₀, δ∞)`` of ``sup_J |F(ā)_0|`` and ``sup_J ‖F(ā)^{(∞)}‖_ν``."""
    residual = defect_grid(abar)
    sums = sum_upper(residual.mag(), axis=0)
    w = weights(abar.nu, sums.size).hi
    delta_inf = sum_upper(mul_upper(sums[1:], w[1:])) if sums.size > 1 else 0.0
    return float(sums[0]), float(delta_inf)


def compute_W0(  # noqa: N802
    abar_zero_mode: Any,
    h: float,
    subdivisions: int | None = None,
) -> float:
    """Upper bound of ``sup_{0≤s≤t≤h} |Φ(t)Ψ(s)|`` for ``Φ' = 2iā₀Φ``, ``Ψ = 1/Φ``.

    With ``Q`` the antiderivative of ``ā₀`` from the start of the step,
    ``|Φ(t)Ψ(s)| = exp(−2 Im(Q(t) − Q(s)))``. ``Q`` is enclosed on ``N·P + 1``
    Chebyshev subintervals and the exponent is maximized over pairs of subintervals with
    ``s`` not after ``t``.

    >>> w0 = compute_W0(np.zeros(3), 0.1)
    >>> bool(1.0 <= w0 <= 1.0 + 4 * np.finfo(float).eps)
    True
    """
    if subdivisions is None:
        subdivisions = settings.W0_SUBDIVISIONS
    if subdivisions < 1:
        msg = f"Need at least one subdivision, got {subdivisions}"
        raise ValueError(msg)
    zero_mode = abar_zero_mode
    if not isinstance(zero_mode, ComplexInterval):
        zero_mode = ComplexInterval.point(np.asarray(zero_mode, dtype=complex))
    pieces = zero_mode.shape[0] * subdivisions + 1
    primitive = chebyshev.antiderivative(zero_mode) * (RealInterval.point(h) * 0.5)
    imaginary = chebyshev.enclose_pieces(primitive, chebyshev.piece_angles(pieces)).im
    earlier = np.maximum.accumulate(imaginary.hi)
    exponent = (RealInterval.point(earlier) - RealInterval.point(imaginary.lo)) * 2.0
    worst = float(np.max(exponent.hi))
    if not np.isfinite(worst) or worst > 700:  # noqa: PLR2004
        msg = f"Zero-mode growth exponent {worst:.3e} cannot be enclosed"
        raise W0Error(msg)
    return float(exp(RealInterval.point(worst)).hi)


def tail_constants(norm: float, h: float) -> tuple[float, float, float]:
    """Upper bounds of ``W_∞``, ``W̄_∞`` and ``W_∞^sup`` for ``‖ā‖_X ≤ norm``.

    For small ``x = 2h‖ā‖_X`` the series ``W_∞ = h Σ xⁿ/(n+1)!`` and
    ``W̄_∞ = h² Σ xⁿ/(n+2)!`` are used; they contain the limits ``h`` and ``h²/2`` of
    the vanishing norm.
    """
    x = float(mul_upper(2.0 * norm, h))
    growth = float(exp(RealInterval.point(x)).hi)
    step = RealInterval.point(h)
    if x <= 1:
        first, second = _exp_quotients(x)
        return (
            float((step * first).hi),
            float((step.sqr() * second).hi),
            growth,
        )
    twice_norm = RealInterval.point(2.0 * norm)
    w_inf = (exp(RealInterval.point(x)) - 1.0) / twice_norm
    bar_w_inf = (w_inf - step) / twice_norm
    return float(w_inf.hi), float(bar_w_inf.hi), growth


def _exp_quotients(x: float) -> tuple[RealInterval, RealInterval]:
    """Enclosures of ``Σ xⁿ/(n+1)!`` and ``Σ xⁿ/(n+2)!`` for ``0 ≤ x ≤ 1``."""
    point = RealInterval.point(x)
    first_term = RealInterval.point(1.0)
    second_term = RealInterval.point(0.5)
    first = first_term
    second = second_term
    for n in range(1, _SERIES_TERMS):
        first_term = first_term * point / float(n + 1)
        second_term = second_term * point / float(n + 2)
        first += first_term
        second += second_term
    # the neglected terms shrink at least geometrically with ratio 1/2
    first += RealInterval(0.0, (first_term * point).hi)
    second += RealInterval(0.0, (second_term * point).hi)
    return first, second


@implement_pretty_repr
@frozen
class EvolutionBounds:
    """Bounds of the evolution operator of the linearization around ``ā``."""

    W0: float = field(converter=float, validator=ge(1.0))  # noqa: N815
    W_inf: float = field(converter=float)  # noqa: N815
    barW_inf: float = field(converter=float)  # noqa: N815
    W_inf_sup: float = field(converter=float)  # noqa: N815
    kappa: float = field(converter=float, validator=gt(0.0))
    """Lower bound of ``κ``."""
    Uh: np.ndarray = field(converter=lambda m: np.array(m, dtype=float), eq=False)  # noqa: N815

    @property
    def W_h(self) -> float:  # noqa: N802
        """``‖U_h‖₁``, the largest column sum."""
        return float(np.max(sum_upper(self.Uh, axis=0)))


def build_Uh(  # noqa: N802
    W0: float,  # noqa: N803
    tails: tuple[float, float, float],
    tail_norm: float,
    tail_dual_norm: float,
) -> EvolutionBounds:
    """Assemble ``U_h`` from ``W₀``, `tail_constants` and the norms of ``ā^{(∞)}``.

    ``tail_norm`` bounds ``‖ā^{(∞)}‖_X`` and ``tail_dual_norm`` bounds
    ``‖ā^{(∞)}‖_{X_{ν^{-1}}}``.
    """
    w_inf, bar_w_inf, w_inf_sup = tails
    w0 = RealInterval.point(W0)
    coupling = w0 * 4.0 * bar_w_inf * tail_norm * tail_dual_norm
    kappa = float((1.0 - coupling).lo)
    if kappa <= 0:
        msg = (
            f"Coupling 4·W0·W̄∞·‖ā∞‖·‖ā∞‖' = {float(coupling.hi):.3e} is not below 1;"
            " reduce the step size"
        )
        raise KappaError(msg)
    divisor = RealInterval.point(kappa)
    cross = w0 * 2.0 * w_inf
    uh = [
        [(w0 / divisor).hi, (cross * tail_dual_norm / divisor).hi],
        [(cross * tail_norm / divisor).hi, (RealInterval.point(w_inf_sup) / divisor).hi],
    ]
    return EvolutionBounds(W0, w_inf, bar_w_inf, w_inf_sup, kappa, np.array(uh, dtype=float))


def inclusion_map(
    rho: Sequence[float],
    eps: Sequence[float],
    delta: Sequence[float],
    uh: np.ndarray,
    h: float,
) -> np.ndarray:
    """Upper bounds of ``f_ε(ϱ₀, ϱ∞) = U_h(ε + h(quadratic terms + δ))``."""
    rho0, rho_inf = RealInterval.point(rho[0]), RealInterval.point(rho[1])
    step = RealInterval.point(h)
    zero_mode = eps[0] + step * ((rho0.sqr() + rho_inf.sqr()) * 2.0 + delta[0])
    tail = eps[1] + step * ((rho0 + rho_inf).sqr() * 2.0 + delta[1])
    matrix = RealInterval.point(uh)
    return np.array([
        float((matrix[0, 0] * zero_mode + matrix[0, 1] * tail).hi),
        float((matrix[1, 0] * zero_mode + matrix[1, 1] * tail).hi),
    ])


def _factors() -> np.ndarray:
    return 1 + settings.RADII_INITIAL_INFLATION * 4.0 ** np.arange(
        settings.INCLUSION_CANDIDATES
    )


def find_radii(
    eps: Sequence[float], delta: Sequence[float], uh: np.ndarray, h: float
) -> np.ndarray:
    """Tube radii ``(ϱ₀, ϱ∞)`` with ``f_ε(ϱ) ≤ ϱ`` verified in interval arithmetic.

    The search starts from the affine part ``U_h(ε + hδ)``, follows the fixed-point
    iteration of ``f_ε`` for a few steps and then inflates geometrically. Each
    inflation factor is applied to the components of ``f_ε(ϱ)`` separately, so a
    component that is purely quadratic in ``ϱ`` can grow past its image.
    """
    seed = inclusion_map((0.0, 0.0), eps, delta, uh, h)
    for _ in range(8):
        if np.max(seed) > _RADIUS_CEILING:
            break
        image = inclusion_map(seed, eps, delta, uh, h)
        if not np.all(np.isfinite(image)):
            break
        seed = np.maximum(seed, image)
    for factor in _factors():
        rho = seed * factor
        for _ in range(_REFINEMENTS):
            if np.max(rho) > _RADIUS_CEILING:
                break
            image = inclusion_map(rho, eps, delta, uh, h)
            if not np.all(np.isfinite(image)):
                break
            if np.all(image <= rho):
                return rho
            rho = np.maximum(rho, image * factor)
    msg = (
        f"No tube radii found from ϱ ≈ ({seed[0]:.3e}, {seed[1]:.3e}) with"
        f" ε = ({eps[0]:.3e}, {eps[1]:.3e}), δ = ({delta[0]:.3e}, {delta[1]:.3e})"
    )
    raise InclusionError(msg)


def local_inclusion_unsplit(
    eps: float, delta: float, W_h: float, h: float  # noqa: N803
) -> float:
    """Single radius ``ϱ`` with ``W_h(ε + h(2ϱ² + δ)) ≤ ϱ``, without the mode split."""
    constant = float(mul_upper(W_h, add_upper(eps, mul_upper(h, delta))))
    quadratic = float(mul_upper(2.0 * h, W_h))
    discriminant = 1 - 4 * quadratic * constant
    if discriminant < 0:
        msg = f"Unsplit inclusion has no real radius (discriminant {discriminant:.3e})"
        raise InclusionError(msg)
    smallest = 2 * constant / (1 + np.sqrt(discriminant))
    width = RealInterval.point(W_h)
    step = RealInterval.point(h)
    for factor in _factors():
        rho = float(smallest * factor)
        quadratic_term = RealInterval.point(rho).sqr() * 2.0 + delta
        image = width * (eps + step * quadratic_term)
        if float(image.hi) <= rho:
            return rho
    msg = f"Unsplit inclusion failed near ϱ = {smallest:.3e}"
    raise InclusionError(msg)


@implement_pretty_repr
@frozen(eq=False)
class StepCertificate:
    """Validated tube around ``ā`` on one time step."""

    index: int
    solution: ChebFourierSolution
    eps0: float = field(converter=float)
    eps_inf: float = field(converter=float)
    rho0: float = field(converter=float)
    rho_inf: float = field(converter=float)
    delta0: float = field(converter=float)
    delta_inf: float = field(converter=float)
    evolution: EvolutionBounds
    abar_norm: float = field(converter=float)
    wall_clock: float = field(default=0.0, converter=float)

    @property
    def h(self) -> float:
        return self.solution.h

    @property
    def t_end(self) -> float:
        return self.solution.t_end

    def endpoint_enclosure(self) -> CosineSeq:
        """Enclosure of ``a(t₀ + h)``: ``ā(t₀ + h)`` widened by the tube radii."""
        centre = CosineSeq(self.solution.nu, self.solution.endpoint())
        return widen_zero_mode(centre, self.rho0).with_tail(self.rho_inf)

    def verify(self) -> bool:
        """Re-evaluate ``f_ε(ϱ) ≤ ϱ`` from the stored quantities."""
        image = inclusion_map(
            (self.rho0, self.rho_inf),
            (self.eps0, self.eps_inf),
            (self.delta0, self.delta_inf),
            self.evolution.Uh,
            self.h,
        )
        return bool(image[0] <= self.rho0 and image[1] <= self.rho_inf)


def local_inclusion(
    abar: ChebFourierSolution,
    eps0: float,
    eps_inf: float,
    *,
    index: int = 0,
    subdivisions: int | None = None,
) -> StepCertificate:
    """Certify a tube around ``ā`` for initial errors ``ε₀`` and ``ε∞``."""
    start = time.perf_counter()
    delta0, delta_inf = defect(abar)
    w0 = compute_W0(abar.coeffs[:, 0], abar.h, subdivisions)
    norm = abar.norm_upper()
    evolution = build_Uh(
        w0,
        tail_constants(norm, abar.h),
        abar.tail_norm_upper(),
        abar.tail_dual_upper(),
    )
    rho = find_radii((eps0, eps_inf), (delta0, delta_inf), evolution.Uh, abar.h)
    elapsed = time.perf_counter() - start
    _LOGGER.debug(
        f"Step {index} at t = {abar.t0:.6g}: W0 = {w0:.6f}, κ = {evolution.kappa:.6f},"
        f" δ = ({delta0:.3e}, {delta_inf:.3e}), ϱ = ({rho[0]:.3e}, {rho[1]:.3e})"
    )
    return StepCertificate(
        index,
        abar,
        eps0,
        eps_inf,
        rho[0],
        rho[1],
        delta0,
        delta_inf,
        evolution,
        norm,
        elapsed,
    )


def _check_segments(
    instance: MarchSchedule, attribute: Any, value: tuple[tuple[int, float], ...]
) -> None:
    for count, h in value:
        if count < 1 or h <= 0:
            msg = f"Schedule segments need positive counts and step sizes, got {(count, h)}"
            raise ValueError(msg)


def _to_segments(value: Any) -> tuple[tuple[int, float], ...]:
    return tuple((int(count), float(h)) for count, h in value)


@implement_pretty_repr
@frozen
class MarchSchedule:
    """Step sizes and projection sizes of a time march.

    ``segments`` lists ``(count, h)`` pairs of a piecewise schedule; without them every
    step uses ``h``. Steps beyond the last segment keep its step size.
    """

    h: float = field(default=2.5e-3, converter=float, validator=gt(0.0))
    n_cheb: int = field(default=13, validator=[instance_of(int), ge(2)])
    fourier_K: int = field(default=27, validator=[instance_of(int), ge(1)])  # noqa: N815
    max_steps: int = field(default=20, validator=[instance_of(int), ge(1)])
    segments: tuple[tuple[int, float], ...] = field(
        factory=tuple, converter=_to_segments, validator=_check_segments
    )
    nu: float = field(default=settings.DEFAULT_NU, converter=float, validator=ge(1.0))

    def __attrs_post_init__(self) -> None:
        largest = max([self.h, *(h for _, h in self.segments)])
        if largest > _LARGE_STEP:
            warnings.warn(
                f"Step size {largest} is unusually large for rigorous integration",
                category=RuntimeWarning,
                stacklevel=1,
            )

    def step_size(self, index: int) -> float:
        if not self.segments:
            return self.h
        passed = 0
        for count, h in self.segments:
            passed += count
            if index < passed:
                return h
        return self.segments[-1][1]


def enclosure_gap(a: ComplexInterval, b: ComplexInterval, nu: float) -> tuple[float, float]:
    """Upper bounds of the zero-mode and the remaining-mode distance of two enclosures."""
    size = max(a.shape[0], b.shape[0])
    gap = (_pad_vector(a, size) - _pad_vector(b, size)).mag()
    w = weights(nu, size).hi
    rest = sum_upper(mul_upper(gap[1:], w[1:])) if size > 1 else 0.0
    return float(gap[0]), float(rest)


def _pad_vector(values: ComplexInterval, size: int) -> ComplexInterval:
    return _pad(values.reshape(1, -1), (1, size)).reshape(-1)


def initial_errors(
    phi: CosineSeq, abar: ChebFourierSolution, eps0: float = 0.0, eps_inf: float = 0.0
) -> tuple[float, float]:
    """``ε₀, ε∞`` between the enclosure ``φ`` and ``ā(t₀)``, on top of given errors."""
    zero_gap, rest_gap = enclosure_gap(phi.coeffs, abar.initial(), phi.nu)
    return (
        float(add_upper(eps0, zero_gap)),
        float(add_upper(add_upper(eps_inf, rest_gap), phi.tail)),
    )


def time_march(
    initial: CosineSeq,
    schedule: MarchSchedule,
    eps0: float = 0.0,
    eps_inf: float = 0.0,
    *,
    stop: Callable[[StepCertificate], bool] | None = None,
    t0: float = 0.0,
) -> list[StepCertificate]:
    """Certify consecutive steps from the enclosure ``initial`` of ``a(t₀)``.

    The march ends when ``stop`` returns `True` for a step or after
    ``schedule.max_steps`` steps. Any failure is raised as `StepFailure`.
    """
    steps: list[StepCertificate] = []
    phi_bar: np.ndarray = initial.mid
    start = t0
    previous: ChebFourierSolution | None = None
    progress_bar = tqdm(
        total=schedule.max_steps,
        desc="Time stepping",
        disable=_LOGGER.level > logging.WARNING,
    )
    try:
        for index in range(schedule.max_steps):
            h = schedule.step_size(index)
            try:
                abar = approx_step(
                    phi_bar, h, schedule.n_cheb, schedule.fourier_K, t0=start, nu=schedule.nu
                )
                if previous is None:
                    eps = initial_errors(initial, abar, eps0, eps_inf)
                else:
                    zero_gap, rest_gap = enclosure_gap(
                        previous.endpoint(), abar.initial(), schedule.nu
                    )
                    eps = (
                        float(add_upper(steps[-1].rho0, zero_gap)),
                        float(add_upper(steps[-1].rho_inf, rest_gap)),
                    )
                step = local_inclusion(abar, *eps, index=index)
            except (StepSizeError, W0Error, KappaError, InclusionError) as exc:
                msg = f"Step {index} at t = {start:.6g} failed: {exc}"
                raise StepFailure(msg, index, steps) from exc
            steps.append(step)
            progress_bar.update()
            previous = abar
            phi_bar = abar.endpoint().mid
            start = abar.t_end
            if stop is not None and stop(step):
                _LOGGER.info(f"Stop condition met after step {index} at t = {start:.6g}")
                break
    finally:
        progress_bar.close()
    _LOGGER.info(
        f"Certified {len(steps)} steps up to t = {start:.6g} with"
        f" ϱ = ({steps[-1].rho0:.3e}, {steps[-1].rho_inf:.3e})"
    )
    return steps


def galerkin_field(a: np.ndarray) -> np.ndarray:
    """Right-hand side ``i(La + a*a)`` truncated to the modes of ``a``."""
    size = a.size
    symbols = -(np.arange(size) ** 2) * OMEGA**2
    return 1j * (symbols * a + convolution_matrix(a, size) @ a)


def reference_orbit(
    phi: Any,
    times: Any,
    K: int,  # noqa: N803
    *,
    rtol: float = 1e-12,
    atol: float = 1e-14,
) -> np.ndarray:
    """Nonrigorous Galerkin solution at ``times`` (starting at ``times[0]``).

    Returns one row of cosine coefficients per time.
    """
    times = np.asarray(times, dtype=float)
    start = _fit(_midpoint_data(phi), K + 1)
    result = solve_ivp(
        lambda _, a: galerkin_field(a),
        (float(times[0]), float(times[-1])),
        start,
        method="DOP853",
        t_eval=times,
        rtol=rtol,
        atol=atol,
    )
    if not result.success:
        msg = f"Reference integration failed: {result.message}"
        raise RuntimeError(msg)
    return result.y.T
