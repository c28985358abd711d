"""Radii polynomial test shared by the equilibrium and manifold proofs.

Given bounds ``Y0 ≥ ‖A F(x̄)‖``, ``Z0 + Z1 ≥ ‖I − A DF(x̄)‖`` and a Lipschitz-type
bound ``Z2`` on the second derivative, the map F has a unique zero in the closed ball
of radius r about x̄ whenever ``p(r) = Z2 r² − (1 − Z1 − Z0) r + Y0 < 0``.
"""

from __future__ import annotations

import logging
import math
from typing import Any

import attrs
from attrs import field, frozen

from nlscap import settings
from nlscap._implementers import implement_pretty_repr
from nlscap.interval import RealInterval

_LOGGER = logging.getLogger(__name__)


def _as_upper_bound(value: Any) -> float:
    bound = float(value.hi) if isinstance(value, RealInterval) else float(value)
    if not bound >= 0:
        msg = f"Bounds must be nonnegative, got {bound}"
        raise ValueError(msg)
    return bound


@implement_pretty_repr
@frozen
class RadiiBounds:
    """Upper bounds entering the radii polynomial, plus the radius once validated."""

    Y0: float = field(converter=_as_upper_bound)  # noqa: N815
    Z0: float = field(converter=_as_upper_bound)  # noqa: N815
    Z1: float = field(converter=_as_upper_bound)  # noqa: N815
    Z2: float = field(converter=_as_upper_bound)  # noqa: N815
    r_star: float | None = None
    r_max: float | None = None


class ValidationError(RuntimeError):
    """No radius with a negative radii polynomial was found."""

    def __init__(self, message: str, bounds: RadiiBounds) -> None:
        super().__init__(message)
        self.bounds = bounds


def radii_polynomial(bounds: RadiiBounds, r: float) -> RealInterval:
    """Enclosure of ``p(r)`` evaluated with interval arithmetic."""
    contraction = 1.0 - RealInterval.point(bounds.Z1) - bounds.Z0
    return RealInterval.point(bounds.Z2) * r * r - contraction * r + bounds.Y0


def validate(bounds: RadiiBounds) -> RadiiBounds:
    """Find a radius ``r_star`` with a rigorously negative radii polynomial.

    Candidates start just above the smallest positive root and move up geometrically
    until the interval evaluation of the polynomial is negative.

    >>> result = validate(RadiiBounds(Y0=0.0, Z0=0.0, Z1=0.0, Z2=1.0))
    >>> result.r_star
    0.5
    """
    contraction = 1.0 - RealInterval.point(bounds.Z1) - bounds.Z0
    if float(contraction.lo) <= 0:
        msg = f"No contraction: Z0 + Z1 = {bounds.Z0 + bounds.Z1} is not below 1"
        raise ValidationError(msg, bounds)
    a = float(contraction.mid)
    if bounds.Z2 == 0:
        r_minus = bounds.Y0 / a
        r_plus = math.inf
    else:
        discriminant = a * a - 4 * bounds.Z2 * bounds.Y0
        if discriminant <= 0:
            msg = f"Radii polynomial has no positive roots (discriminant {discriminant:.3e})"
            raise ValidationError(msg, bounds)
        root = math.sqrt(discriminant)
        r_minus = 2 * bounds.Y0 / (a + root)
        r_plus = (a + root) / (2 * bounds.Z2)
    for r in _candidates(bounds, r_minus, r_plus):
        if float(radii_polynomial(bounds, r).hi) < 0:
            _LOGGER.debug(f"Radii polynomial negative at r = {r:.6e}")
            return attrs.evolve(bounds, r_star=r, r_max=r_plus)
    msg = (
        f"Could not validate a radius between {r_minus:.6e} and {r_plus:.6e} for"
        f" Y0={bounds.Y0:.3e}, Z0={bounds.Z0:.3e}, Z1={bounds.Z1:.3e}, Z2={bounds.Z2:.3e}"
    )
    raise ValidationError(msg, bounds)


def _candidates(bounds: RadiiBounds, r_minus: float, r_plus: float) -> list[float]:
    if bounds.Y0 == 0:
        if math.isinf(r_plus):
            return [1.0]
        return [r_plus / 2]
    candidates = []
    inflation = settings.RADII_INITIAL_INFLATION
    for _ in range(settings.RADII_MAX_CANDIDATES):
        r = r_minus * (1 + inflation)
        if r >= r_plus:
            break
        candidates.append(r)
        inflation *= 4
    if not math.isinf(r_plus):
        candidates.append(0.5 * (r_minus + r_plus))
    return candidates


def validation_slack(bounds: RadiiBounds) -> RealInterval:
    """Re-evaluate ``p(r_star)`` for rechecks; negative means the proof stands."""
    if bounds.r_star is None:
        msg = "Bounds carry no validated radius"
        raise ValueError(msg)
    return radii_polynomial(bounds, bounds.r_star)
