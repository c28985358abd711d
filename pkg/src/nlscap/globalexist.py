"""Global existence certificates for data close to a constant.

For the p-power nonlinearity, constant initial data z₀ evolve by the homogeneous
equation ``ż = i z^p`` with the explicit solution

    ζ(t) = z₀ (1 − i(p−1) z₀^{p−1} t)^{−1/(p−1)},

which decays to zero whenever ``Im z₀^{p−1} ≥ 0``. A perturbation φ of such data is
controlled by a ball condition: if ``‖φ‖ ≤ ρ₁|z₀|^p`` with ``|z₀| ≤ ρ₀`` and

    ρ₁ exp{(π/2) P(r, ρ₀)/(p−1)} < r,   P(r, ρ₀) = Σ_{m=2}^p C(p,m) (r ρ₀^{p−1})^{m−1},

then the solution exists for all positive time and converges to zero.
"""

from __future__ import annotations

import logging
import math
from typing import Any

import numpy as np
from attrs import field, frozen
from attrs.validators import ge, instance_of
from scipy.optimize import minimize_scalar

from nlscap import settings
from nlscap._implementers import implement_pretty_repr
from nlscap.interval import (
    HALF_PI,
    PI,
    ComplexInterval,
    RealInterval,
    add_upper,
    arg,
    exp,
    log,
    modulus,
)
from nlscap.seqspace import CosineSeq, coefficient_norm_upper
from nlscap.settings import Sector

_LOGGER = logging.getLogger(__name__)


class AmbiguousSectorError(ValueError):
    """The enclosure of z₀^{p−1} straddles the boundary between the sectors."""


class BranchError(ValueError):
    """The root in the homogeneous solution crosses its branch cut."""


class StableSetError(RuntimeError):
    """The stable-set inequality could not be verified."""


def cp_constant(p: int) -> RealInterval:
    """Enclosure of ``C_p = exp{−(π/2)(2^p − p − 1)/(p − 1)}``.

    >>> c2 = cp_constant(2)
    >>> round(float(c2.mid), 12)
    0.207879576351
    """
    _check_power(p)
    exponent = -HALF_PI * float(2**p - p - 1) / float(p - 1)
    return exp(exponent)


def p_poly(r: Any, rho0: Any, p: int) -> RealInterval:
    """Enclosure of ``P(r, ρ₀) = Σ_{m=2}^p C(p,m) (r ρ₀^{p−1})^{m−1}``.

    >>> value = p_poly(1.0, 1.0, 3)
    >>> float(value.lo), float(value.hi)
    (4.0, 4.0)
    """
    _check_power(p)
    base = RealInterval.point(0.0) + r
    base *= _to_interval(rho0) ** (p - 1)
    total = RealInterval.point(0.0)
    for m in range(2, p + 1):
        total += base ** (m - 1) * float(math.comb(p, m))
    return total


def _to_interval(value: Any) -> RealInterval:
    if isinstance(value, RealInterval):
        return value
    return RealInterval.point(float(value))


def _check_power(p: int) -> None:
    if not isinstance(p, (int, np.integer)) or p < 2:
        msg = f"Power p must be an integer of at least 2, got {p}"
        raise ValueError(msg)


def _growth_exponent(r: float, rho0: float, p: int) -> RealInterval:
    return HALF_PI * p_poly(r, rho0, p) / float(p - 1)


def stable_inequality(rho0: float, rho1: float, r: float, p: int) -> RealInterval:
    """Enclosure of ``ρ₁ exp{(π/2) P(r,ρ₀)/(p−1)} − r``; negative means stable."""
    return exp(_growth_exponent(r, rho0, p)) * rho1 - r


def classify_sector(z0: ComplexInterval, p: int) -> Sector:
    """Decide the sign of ``Im z₀^{p−1}`` rigorously.

    >>> classify_sector(ComplexInterval.point(1j), 2)
    <Sector.FORWARD: 1>
    >>> classify_sector(ComplexInterval.point(-1j), 2)
    <Sector.BACKWARD: 2>
    """
    _check_power(p)
    power = z0 ** (p - 1)
    if float(power.im.lo) >= 0:
        return Sector.FORWARD
    if float(power.im.hi) <= 0:
        return Sector.BACKWARD
    msg = (
        f"Im z0^{p - 1} lies in [{float(power.im.lo):.3e}, {float(power.im.hi):.3e}],"
        " which straddles the sector boundary"
    )
    raise AmbiguousSectorError(msg)


@implement_pretty_repr
@frozen(eq=False)
class HomogeneousState:
    z0: ComplexInterval = field(validator=instance_of(ComplexInterval))
    p: int = field(validator=ge(2))

    @property
    def theta(self) -> RealInterval:
        """Enclosure of ``ϑ = (p−1) Arg(z₀) mod 2π``, shifted into ``[0, 2π)``."""
        value = arg(self.z0) * float(self.p - 1)
        two_pi = PI * 2.0
        turns = math.floor(float(value.lo) / float(two_pi.hi))
        return value - two_pi * float(turns)

    @property
    def sector(self) -> Sector:
        return classify_sector(self.z0, self.p)


@implement_pretty_repr
@frozen
class StableBallParams:
    """Parameters of a verified stable ball around constant data."""

    p: int = field(validator=ge(2))
    rho0: float = field(converter=float)
    rho1: float = field(converter=float)
    r: float = field(converter=float)
    z0: complex = field(converter=complex)
    margin: float = field(converter=float)
    """Upper bound of ``ρ₁ exp{…} − r``, strictly negative."""
    candidate_index: int = -1
    """Position of ``r`` among the searched candidates; -1 is the optimizing radius."""


def optimal_radius(rho0: float, p: int) -> float:
    """Maximizer of ``r exp{−(π/2) P(r,ρ₀)/(p−1)}``, computed in floating point.

    >>> round(optimal_radius(2.0, 2) * math.pi, 12)
    1.0
    """
    if p == 2:  # noqa: PLR2004
        return 2.0 / (math.pi * rho0)

    def objective(log_r: float) -> float:
        r = math.exp(log_r)
        total = sum(
            math.comb(p, m) * (r * rho0 ** (p - 1)) ** (m - 1) for m in range(2, p + 1)
        )
        return -log_r + 0.5 * math.pi * total / (p - 1)

    center = -(p - 1) * math.log(rho0)
    result = minimize_scalar(objective, bounds=(center - 40, center + 5), method="bounded")
    return float(math.exp(result.x))


def radius_candidates(rho0: float, rho1: float, p: int) -> list[float]:
    """Logarithmic grid on ``[ρ₁, span·ρ₁]``, followed by the optimizing radius."""
    candidates: list[float] = []
    if rho1 > 0:
        candidates.extend(
            np.logspace(
                math.log10(rho1),
                math.log10(rho1 * settings.STABLE_SET_GRID_SPAN),
                settings.STABLE_SET_GRID_SIZE,
            ).tolist()
        )
    candidates.append(optimal_radius(rho0, p))
    return candidates


def check_stable(
    rho0: float, rho1: float, p: int, z0: complex = 0j
) -> StableBallParams:
    """Search a radius r for which the stable-set inequality holds rigorously."""
    candidates = radius_candidates(rho0, rho1, p)
    for index, r in enumerate(candidates):
        margin = stable_inequality(rho0, rho1, r, p)
        if float(margin.hi) < 0:
            if index == len(candidates) - 1:
                index = -1  # noqa: PLW2901
            return StableBallParams(
                p, rho0, rho1, r, z0, float(margin.hi), candidate_index=index
            )
    msg = f"No radius satisfies the stable-set inequality for ρ0={rho0:.6g}, ρ1={rho1:.6g}"
    raise StableSetError(msg)


def verify_stable(a_end: CosineSeq, p: int = 2) -> StableBallParams:
    """Verify that every sequence in ``a_end`` converges to zero forward in time.

    The zero-mode midpoint becomes z₀; everything else, including the radius of the
    zero-mode enclosure and the tail, is treated as the perturbation φ.
    """
    z0_value = complex(a_end.coeffs.mid[0])
    z0 = ComplexInterval.point(z0_value)
    if z0_value == 0:
        msg = "Zero-mode midpoint vanishes; no stable ball around zero data"
        raise StableSetError(msg)
    sector = classify_sector(z0, p)
    if sector is not Sector.FORWARD:
        msg = f"Zero mode {z0_value} lies in the {sector.name.lower()} sector"
        raise StableSetError(msg)
    phi_norm = perturbation_norm(a_end, z0_value)
    size = modulus(z0)
    rho0 = float(size.hi)
    rho1 = float((RealInterval.point(phi_norm) / size**p).hi)
    _LOGGER.debug(f"Stable-set check with ρ0={rho0:.6g}, ρ1={rho1:.6g}")
    return check_stable(rho0, rho1, p, z0_value)


def perturbation_norm(a: CosineSeq, z0: complex) -> float:
    """Upper bound of ``‖a − ι⁰(z₀)‖_ν`` over the whole enclosure."""
    shifted = a - CosineSeq.from_point(a.nu, [z0])
    return float(add_upper(coefficient_norm_upper(shifted), shifted.tail))


def zeta(t: Any, z0: ComplexInterval, p: int) -> ComplexInterval:
    """Enclosure of the homogeneous solution ζ(t) with principal roots.

    >>> value = zeta(RealInterval.point(1.0), ComplexInterval.point(1j), 2)
    >>> bool(value.contains(0.5j))
    True
    """
    _check_power(p)
    t = _to_interval(t)
    power = z0 ** (p - 1)
    denominator = 1.0 - power * ComplexInterval.point(1j * (p - 1)) * t
    if float(denominator.re.lo) <= 0 and bool(denominator.im.contains_zero()):
        msg = "Denominator of the homogeneous solution reaches the negative real axis"
        raise BranchError(msg)
    if p == 2:  # noqa: PLR2004
        return z0 / denominator
    size = log(modulus(denominator)) * (-1.0 / (p - 1))
    angle = arg(denominator) * (-1.0 / (p - 1))
    root = exp(ComplexInterval(size, angle))
    return z0 * root


def zeta_decay(t: Any, z0: ComplexInterval, p: int) -> RealInterval:
    """Upper bound of ``|ζ(t)|`` from ``|ζ|^{2(p−1)} ≤ |w|²/(1 + (p−1)²|w|²t²)``.

    Holds for t ≥ 0 in the forward sector and for t ≤ 0 in the backward sector.

    >>> bound = zeta_decay(1.0, ComplexInterval.point(1j), 2)
    >>> round(float(bound.hi), 6)
    0.707107
    """
    t = _to_interval(t)
    sector = classify_sector(z0, p)
    if (sector is Sector.FORWARD and float(t.lo) < 0) or (
        sector is Sector.BACKWARD and float(t.hi) > 0
    ):
        msg = f"Decay bound in the {sector.name.lower()} sector needs t on that side"
        raise ValueError(msg)
    w_squared = modulus(z0 ** (p - 1)).sqr()
    ratio = w_squared / (1.0 + w_squared * t.sqr() * float((p - 1) ** 2))
    if float(ratio.hi) == 0:
        return RealInterval.point(0.0)
    return exp(log(RealInterval(max(float(ratio.lo), 2.0**-1074), ratio.hi)) / float(2 * (p - 1)))


@implement_pretty_repr
@frozen
class NearConstantCertificate:
    """Outcome of the small-perturbation test ``‖u₀‖ < C_p|z₀|``."""

    accepted: bool
    sector: Sector | None
    cp: float
    rho0: float
    rho1: float
    r: float
    """Decay constant: ``‖a(t) − ι⁰(ζ(t))‖ ≤ r|ζ(t)|^p`` for accepted data."""


def near_constant_certificate(
    z0: ComplexInterval, u0_norm: Any, p: int
) -> NearConstantCertificate:
    """Accept constant data z₀ plus a perturbation of norm ``u0_norm`` when it is small.

    >>> cert = near_constant_certificate(ComplexInterval.point(1.0), 0.1, 2)
    >>> cert.accepted, cert.sector
    (True, <Sector.FORWARD: 1>)
    """
    cp = cp_constant(p)
    norm = _to_interval(u0_norm)
    size = modulus(z0)
    rho0 = float(size.hi)
    if float(size.lo) <= 0:
        return NearConstantCertificate(False, None, float(cp.hi), rho0, math.inf, 0.0)
    sector = classify_sector(z0, p)
    rho1 = float((norm / size**p).hi)
    radius = float((1.0 / RealInterval.point(rho0) ** (p - 1)).hi)
    accepted = bool(float(norm.hi) < float((cp * size).lo))
    return NearConstantCertificate(
        accepted, sector if accepted else None, float(cp.hi), rho0, rho1, radius
    )


@frozen
class PhasePortrait:
    """Nonrigorous samples of the homogeneous vector field ``ż = i z^p``."""

    p: int
    vector_field: np.ndarray
    """Rows of (x, y, Re ż, Im ż, ṙ) on a square grid."""
    trajectories: np.ndarray
    """Rows of (trajectory, t, x, y) sampled from the closed-form solution."""
    rays: tuple[float, ...]
    """Arguments where the radial derivative vanishes."""

    FIELD_HEADER = ("x", "y", "dx", "dy", "dr")
    TRAJECTORY_HEADER = ("trajectory", "t", "x", "y")


def phase_portrait(
    p: int, grid: int = 64, extent: float = 1.5, n_trajectories: int = 8
) -> PhasePortrait:
    """Sample the homogeneous dynamics on a grid and along a few closed-form orbits."""
    _check_power(p)
    axis = np.linspace(-extent, extent, grid)
    x, y = np.meshgrid(axis, axis)
    z = x + 1j * y
    velocity = 1j * z**p
    with np.errstate(invalid="ignore", divide="ignore"):
        radial = np.where(np.abs(z) > 0, np.real(np.conj(z) * velocity) / np.abs(z), 0.0)
    field_rows = np.column_stack([
        x.ravel(),
        y.ravel(),
        velocity.real.ravel(),
        velocity.imag.ravel(),
        radial.ravel(),
    ])
    trajectory_rows = []
    times = np.linspace(0.0, 10.0, 101)
    for index in range(n_trajectories):
        angle = (index + 0.5) * np.pi / (n_trajectories * (p - 1))
        z0 = extent * np.exp(1j * angle)
        values = _zeta_float(times, z0, p)
        trajectory_rows.extend(
            (index, t, value.real, value.imag) for t, value in zip(times, values)
        )
    rays = tuple(j * math.pi / (p - 1) for j in range(2 * (p - 1)))
    return PhasePortrait(p, field_rows, np.array(trajectory_rows), rays)


def _zeta_float(t: np.ndarray, z0: complex, p: int) -> np.ndarray:
    w = z0 ** (p - 1)
    return z0 * (1 - 1j * (p - 1) * w * t) ** (-1.0 / (p - 1))


def count_radial_sign_changes(p: int, samples: int = 3600) -> int:
    """Count where ṙ changes sign on the unit circle; equals ``2(p−1)``.

    >>> count_radial_sign_changes(3)
    4
    """
    angles = (np.arange(samples) + 0.5) * 2 * np.pi / samples
    z = np.exp(1j * angles)
    radial = np.real(np.conj(z) * 1j * z**p)
    signs = np.sign(radial)
    return int(np.sum(signs != np.roll(signs, 1)))
