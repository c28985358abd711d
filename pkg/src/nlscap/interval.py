"""Interval arithmetic with guaranteed outward rounding.

`RealInterval` and `ComplexInterval` hold their endpoints in `numpy` arrays, so one
instance represents a scalar enclosure (0-dimensional arrays) or a whole grid of
enclosures, and every operation is vectorized.

Rounding never touches the floating-point environment. After each native operation,
an error-free transformation (TwoSum, Dekker's TwoProduct, residuals for division and
square roots) decides whether the result is exact; only inexact results are moved to
the adjacent representable value with `numpy.nextafter`. Exact inputs therefore keep
exact results:

>>> x = RealInterval(1.0, 2.0) + RealInterval(3.0, 4.0)
>>> float(x.lo), float(x.hi)
(4.0, 6.0)
>>> y = RealInterval.point(1.0) / RealInterval.point(3.0)
>>> bool(y.lo < y.hi)
True

Large products and sums (matrix products, convolutions) are evaluated in
midpoint-radius form with a-priori floating-point error bounds, see `matmul` and
`sum_upper`.
"""

from __future__ import annotations

import math
from typing import Any, Callable, Literal, Union

import numpy as np
from attrs import field, frozen

__all__ = [
    "HALF_PI",
    "LN2",
    "PI",
    "ComplexInterval",
    "DomainError",
    "IntervalMatrix",
    "RealInterval",
    "arctan",
    "arg",
    "arith",
    "cos",
    "elem",
    "exp",
    "log",
    "mag",
    "matmul",
    "mig",
    "modulus",
    "sin",
    "sqrt",
]

_MAX = float(np.finfo(float).max)
_UNIT_ROUNDOFF = 2.0**-53
_ETA = 2.0**-1074
_SPLITTER = 134217729.0
_SAFE_BIG = 2.0**995
_SAFE_SMALL = 2.0**-960
_TAYLOR_DEGREE = 22


class DomainError(ValueError):
    """Operation undefined on (part of) the input enclosure."""


def _as_endpoints(value: Any) -> np.ndarray:
    array = np.array(value, dtype=float)
    array.setflags(write=False)
    return array


def _down(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return np.nextafter(x, -np.inf)


def _up(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return np.nextafter(x, np.inf)


def _clamp(lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lo = np.where(lo == np.inf, _MAX, lo)
    hi = np.where(hi == -np.inf, -_MAX, hi)
    return lo, hi


def _gamma(n: int) -> float:
    """Upper bound of n·u/(1 − n·u), the classical summation error constant."""
    nu = (n + 2) * _UNIT_ROUNDOFF
    return float(_up(np.float64(nu / (1.0 - nu))))


def _add_down(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore", over="ignore"):
        s = a + b
        bb = s - a
        err = (a - (s - bb)) + (b - bb)
    lo = np.where(err < 0, _down(s), s)
    return np.where(lo == np.inf, _MAX, lo)


def _add_up(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore", over="ignore"):
        s = a + b
        bb = s - a
        err = (a - (s - bb)) + (b - bb)
    hi = np.where(err > 0, _up(s), s)
    return np.where(hi == -np.inf, -_MAX, hi)


def _split(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    c = _SPLITTER * a
    high = c - (c - a)
    return high, a - high


def _product_error(a: np.ndarray, b: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Exact ``a*b - p`` where Dekker's algorithm applies, NaN elsewhere."""
    with np.errstate(invalid="ignore", over="ignore", under="ignore"):
        a_hi, a_lo = _split(a)
        b_hi, b_lo = _split(b)
        err = ((a_hi * b_hi - p) + a_hi * b_lo + a_lo * b_hi) + a_lo * b_lo
    safe = (np.abs(a) < _SAFE_BIG) & (np.abs(b) < _SAFE_BIG) & (np.abs(p) >= _SAFE_SMALL)
    return np.where(safe, err, np.nan)


def _mul_bounds(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    with np.errstate(invalid="ignore", over="ignore", under="ignore"):
        p = a * b
    exact_zero = (a == 0) | (b == 0)
    p = np.where(exact_zero, 0.0, p)
    err = _product_error(a, b, p)
    lo = np.where(exact_zero | (err >= 0), p, _down(p))
    hi = np.where(exact_zero | (err <= 0), p, _up(p))
    return _clamp(lo, hi)


def _div_bounds(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    with np.errstate(invalid="ignore", over="ignore", under="ignore", divide="ignore"):
        q = a / b
        p = q * b
    exact_zero = (a == 0) & (b != 0)
    q = np.where(exact_zero, 0.0, q)
    err = _product_error(q, b, p)
    with np.errstate(invalid="ignore", over="ignore"):
        residual = (a - p) - err
    # the exact quotient is q + residual / b
    direction = np.sign(residual) * np.sign(b)
    known = np.isfinite(residual) & np.isfinite(q) & (np.abs(q) >= _SAFE_SMALL)
    lo = np.where(exact_zero | (known & (direction >= 0)), q, _down(q))
    hi = np.where(exact_zero | (known & (direction <= 0)), q, _up(q))
    return _clamp(lo, hi)


def _sqrt_bounds(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    with np.errstate(invalid="ignore"):
        s = np.sqrt(x)
    with np.errstate(invalid="ignore", over="ignore", under="ignore"):
        p = s * s
    err = _product_error(s, s, p)
    with np.errstate(invalid="ignore", over="ignore"):
        residual = (x - p) - err
    exact = (x == 0) | (x == np.inf)
    known = np.isfinite(residual)
    lo = np.where(exact | (known & (residual >= 0)), s, _down(s))
    hi = np.where(exact | (known & (residual <= 0)), s, _up(s))
    return np.maximum(lo, 0.0), hi


def _midpoint(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore", over="ignore"):
        mid = 0.5 * lo + 0.5 * hi
    mid = np.where(np.isneginf(lo) & np.isfinite(hi), hi, mid)
    mid = np.where(np.isposinf(hi) & np.isfinite(lo), lo, mid)
    mid = np.where(np.isneginf(lo) & np.isposinf(hi), 0.0, mid)
    return np.clip(mid, lo, hi)


def sum_upper(x: np.ndarray, axis: int | tuple[int, ...] | None = None) -> np.ndarray:
    """Rigorous upper bound of the exact sum of floats along an axis."""
    x = np.asarray(x, dtype=float)
    n = x.size if axis is None else int(np.prod([x.shape[i] for i in np.atleast_1d(axis)]))
    with np.errstate(invalid="ignore", over="ignore"):
        total = np.sum(x, axis=axis)
        spread = np.sum(np.abs(x), axis=axis)
        bound = _up(spread * (2 * _gamma(n)))
    return _add_up(total, bound)


def sum_lower(x: np.ndarray, axis: int | tuple[int, ...] | None = None) -> np.ndarray:
    """Rigorous lower bound of the exact sum of floats along an axis."""
    return -sum_upper(-np.asarray(x, dtype=float), axis=axis)


def matmul_upper(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Upper bound of the exact product of two nonnegative float matrices."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = a.shape[-1]
    with np.errstate(over="ignore", under="ignore"):
        product = a @ b
        return _up(product * (1 + 2 * _gamma(n))) + (n + 1) * _ETA


def mul_upper(a: Any, b: Any) -> np.ndarray:
    """Upper bound of the exact product of two nonnegative float arrays."""
    return _mul_bounds(np.asarray(a, dtype=float), np.asarray(b, dtype=float))[1]


def add_upper(a: Any, b: Any) -> np.ndarray:
    """Upper bound of the exact sum of two float arrays."""
    return _add_up(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def div_upper(a: Any, b: Any) -> np.ndarray:
    """Upper bound of the exact quotient of two float arrays."""
    return _div_bounds(np.asarray(a, dtype=float), np.asarray(b, dtype=float))[1]


@frozen(eq=False)
class RealInterval:
    """Array of closed real intervals ``[lo, hi]``.

    Python floats and `numpy` arrays mixed into arithmetic are taken as exact point
    values.
    """

    lo: np.ndarray = field(converter=_as_endpoints)
    hi: np.ndarray = field(converter=_as_endpoints)

    __array_ufunc__ = None

    def __attrs_post_init__(self) -> None:
        if self.lo.shape != self.hi.shape:
            msg = f"Endpoint shapes differ: {self.lo.shape} and {self.hi.shape}"
            raise ValueError(msg)
        if np.any(np.isnan(self.lo)) or np.any(np.isnan(self.hi)):
            msg = "Interval endpoints cannot be NaN"
            raise ValueError(msg)
        if np.any(self.lo > self.hi):
            msg = "Lower interval endpoint exceeds the upper endpoint"
            raise ValueError(msg)
        if np.any(self.lo == np.inf) or np.any(self.hi == -np.inf):
            msg = "Lower endpoint cannot be +inf and upper endpoint cannot be -inf"
            raise ValueError(msg)

    @classmethod
    def point(cls, value: Any) -> RealInterval:
        array = np.asarray(value, dtype=float)
        return cls(array, array)

    @classmethod
    def zeros(cls, shape: int | tuple[int, ...] = ()) -> RealInterval:
        return cls.point(np.zeros(shape))

    @classmethod
    def from_midrad(cls, mid: Any, rad: Any) -> RealInterval:
        mid = np.asarray(mid, dtype=float)
        rad = np.asarray(rad, dtype=float)
        return cls(_add_down(mid, -rad), _add_up(mid, rad))

    @classmethod
    def hull(cls, *intervals: RealInterval) -> RealInterval:
        lo = np.minimum.reduce([i.lo for i in intervals])
        hi = np.maximum.reduce([i.hi for i in intervals])
        return cls(lo, hi)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.lo.shape

    @property
    def ndim(self) -> int:
        return self.lo.ndim

    @property
    def size(self) -> int:
        return self.lo.size

    def __len__(self) -> int:
        return len(self.lo)

    def __getitem__(self, index: Any) -> RealInterval:
        return RealInterval(self.lo[index], self.hi[index])

    def reshape(self, *shape: Any) -> RealInterval:
        return RealInterval(self.lo.reshape(*shape), self.hi.reshape(*shape))

    @property
    def mid(self) -> np.ndarray:
        return _midpoint(self.lo, self.hi)

    @property
    def rad(self) -> np.ndarray:
        """Upper bound of the radius about `mid`."""
        mid = self.mid
        return np.maximum(_add_up(self.hi, -mid), _add_up(mid, -self.lo))

    @property
    def width(self) -> np.ndarray:
        return _add_up(self.hi, -self.lo)

    def mag(self) -> np.ndarray:
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    def mig(self) -> np.ndarray:
        return np.where(
            self.contains_zero(), 0.0, np.minimum(np.abs(self.lo), np.abs(self.hi))
        )

    def contains_zero(self) -> np.ndarray:
        return (self.lo <= 0) & (self.hi >= 0)

    def contains(self, value: Any) -> np.ndarray:
        if isinstance(value, RealInterval):
            return (self.lo <= value.lo) & (value.hi <= self.hi)
        value = np.asarray(value, dtype=float)
        return (self.lo <= value) & (value <= self.hi)

    def is_subset_of(self, other: RealInterval) -> np.ndarray:
        return other.contains(self)

    def intersects(self, other: RealInterval) -> np.ndarray:
        return (self.lo <= other.hi) & (other.lo <= self.hi)

    def identical(self, other: object) -> bool:
        if not isinstance(other, RealInterval):
            return False
        return bool(np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi))

    def __neg__(self) -> RealInterval:
        return RealInterval(-self.hi, -self.lo)

    def __abs__(self) -> RealInterval:
        return RealInterval(self.mig(), self.mag())

    def __add__(self, other: Any) -> RealInterval:
        if isinstance(other, ComplexInterval):
            return NotImplemented
        other = _to_real(other)
        return RealInterval(_add_down(self.lo, other.lo), _add_up(self.hi, other.hi))

    __radd__ = __add__

    def __sub__(self, other: Any) -> RealInterval:
        if isinstance(other, ComplexInterval):
            return NotImplemented
        return self + (-_to_real(other))

    def __rsub__(self, other: Any) -> RealInterval:
        return _to_real(other) - self

    def __mul__(self, other: Any) -> RealInterval:
        if isinstance(other, ComplexInterval):
            return NotImplemented
        other = _to_real(other)
        candidates = [
            _mul_bounds(self.lo, other.lo),
            _mul_bounds(self.lo, other.hi),
            _mul_bounds(self.hi, other.lo),
            _mul_bounds(self.hi, other.hi),
        ]
        lo = np.minimum.reduce([c[0] for c in candidates])
        hi = np.maximum.reduce([c[1] for c in candidates])
        return RealInterval(lo, hi)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> RealInterval:
        if isinstance(other, ComplexInterval):
            return NotImplemented
        other = _to_real(other)
        if np.any(other.contains_zero()):
            msg = "Division by an interval that contains zero"
            raise DomainError(msg)
        candidates = [
            _div_bounds(self.lo, other.lo),
            _div_bounds(self.lo, other.hi),
            _div_bounds(self.hi, other.lo),
            _div_bounds(self.hi, other.hi),
        ]
        lo = np.minimum.reduce([c[0] for c in candidates])
        hi = np.maximum.reduce([c[1] for c in candidates])
        return RealInterval(lo, hi)

    def __rtruediv__(self, other: Any) -> RealInterval:
        return _to_real(other) / self

    def sqr(self) -> RealInterval:
        lo_sq = _mul_bounds(self.lo, self.lo)
        hi_sq = _mul_bounds(self.hi, self.hi)
        upper = np.maximum(lo_sq[1], hi_sq[1])
        lower = np.where(
            self.lo >= 0, lo_sq[0], np.where(self.hi <= 0, hi_sq[0], 0.0)
        )
        return RealInterval(lower, upper)

    def __pow__(self, exponent: int) -> RealInterval:
        if not isinstance(exponent, (int, np.integer)) or exponent < 0:
            msg = f"Only nonnegative integer powers are supported, got {exponent}"
            raise TypeError(msg)
        result = RealInterval.point(np.ones(self.shape))
        base = self
        n = int(exponent)
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base.sqr()
        return result

    def sum(self, axis: int | tuple[int, ...] | None = None) -> RealInterval:
        return RealInterval(sum_lower(self.lo, axis), sum_upper(self.hi, axis))

    def max(self, axis: int | None = None) -> RealInterval:
        return RealInterval(np.max(self.lo, axis=axis), np.max(self.hi, axis=axis))

    def min(self, axis: int | None = None) -> RealInterval:
        return RealInterval(np.min(self.lo, axis=axis), np.min(self.hi, axis=axis))

    def intersection(self, other: RealInterval) -> RealInterval:
        return RealInterval(np.maximum(self.lo, other.lo), np.minimum(self.hi, other.hi))

    def to_complex(self) -> ComplexInterval:
        return ComplexInterval(self, RealInterval.zeros(self.shape))

    def __repr__(self) -> str:
        if self.ndim == 0:
            return f"RealInterval({float(self.lo)!r}, {float(self.hi)!r})"
        return f"RealInterval(shape={self.shape})"


def _to_real(value: Any) -> RealInterval:
    if isinstance(value, RealInterval):
        return value
    array = np.asarray(value)
    if np.iscomplexobj(array):
        msg = "Cannot combine a complex value with a RealInterval"
        raise TypeError(msg)
    return RealInterval.point(array)


def _to_complex(value: Any) -> ComplexInterval:
    if isinstance(value, ComplexInterval):
        return value
    if isinstance(value, RealInterval):
        return value.to_complex()
    return ComplexInterval.point(value)


@frozen(eq=False)
class ComplexInterval:
    """Array of complex rectangles ``re + i·im``."""

    re: RealInterval
    im: RealInterval

    __array_ufunc__ = None

    def __attrs_post_init__(self) -> None:
        if self.re.shape != self.im.shape:
            msg = f"Real and imaginary shapes differ: {self.re.shape} and {self.im.shape}"
            raise ValueError(msg)

    @classmethod
    def point(cls, value: Any) -> ComplexInterval:
        array = np.asarray(value, dtype=complex)
        return cls(RealInterval.point(array.real), RealInterval.point(array.imag))

    @classmethod
    def zeros(cls, shape: int | tuple[int, ...] = ()) -> ComplexInterval:
        return cls.point(np.zeros(shape, dtype=complex))

    @classmethod
    def from_midrad(cls, center: Any, radius: Any) -> ComplexInterval:
        """Smallest rectangle, rounded outward, containing the disks."""
        center = np.asarray(center, dtype=complex)
        return cls(
            RealInterval.from_midrad(center.real, radius),
            RealInterval.from_midrad(center.imag, radius),
        )

    @classmethod
    def from_rect(
        cls, re_lo: Any, re_hi: Any, im_lo: Any, im_hi: Any
    ) -> ComplexInterval:
        return cls(RealInterval(re_lo, re_hi), RealInterval(im_lo, im_hi))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.re.shape

    @property
    def ndim(self) -> int:
        return self.re.ndim

    @property
    def size(self) -> int:
        return self.re.size

    def __len__(self) -> int:
        return len(self.re)

    def __getitem__(self, index: Any) -> ComplexInterval:
        return ComplexInterval(self.re[index], self.im[index])

    def reshape(self, *shape: Any) -> ComplexInterval:
        return ComplexInterval(self.re.reshape(*shape), self.im.reshape(*shape))

    @property
    def mid(self) -> np.ndarray:
        return self.re.mid + 1j * self.im.mid

    def midrad(self) -> tuple[np.ndarray, np.ndarray]:
        """Disk centers and upper bounds of the disk radii covering the rectangles."""
        return self.mid, _add_up(self.re.rad, self.im.rad)

    def mag(self) -> np.ndarray:
        return modulus(self).hi

    def mig(self) -> np.ndarray:
        return modulus(self).lo

    def abs1_upper(self) -> np.ndarray:
        """Upper bound of |Re z| + |Im z| over the rectangles."""
        return _add_up(self.re.mag(), self.im.mag())

    def contains_zero(self) -> np.ndarray:
        return self.re.contains_zero() & self.im.contains_zero()

    def contains(self, value: Any) -> np.ndarray:
        if isinstance(value, ComplexInterval):
            return self.re.contains(value.re) & self.im.contains(value.im)
        value = np.asarray(value, dtype=complex)
        return self.re.contains(value.real) & self.im.contains(value.imag)

    def is_subset_of(self, other: ComplexInterval) -> np.ndarray:
        return other.contains(self)

    def identical(self, other: object) -> bool:
        if not isinstance(other, ComplexInterval):
            return False
        return self.re.identical(other.re) and self.im.identical(other.im)

    def conj(self) -> ComplexInterval:
        return ComplexInterval(self.re, -self.im)

    def __neg__(self) -> ComplexInterval:
        return ComplexInterval(-self.re, -self.im)

    def __add__(self, other: Any) -> ComplexInterval:
        other = _to_complex(other)
        return ComplexInterval(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other: Any) -> ComplexInterval:
        other = _to_complex(other)
        return ComplexInterval(self.re - other.re, self.im - other.im)

    def __rsub__(self, other: Any) -> ComplexInterval:
        return _to_complex(other) - self

    def __mul__(self, other: Any) -> ComplexInterval:
        if isinstance(other, RealInterval) or (
            not isinstance(other, ComplexInterval) and not np.iscomplexobj(other)
        ):
            other = _to_real(other)
            return ComplexInterval(self.re * other, self.im * other)
        other = _to_complex(other)
        re = self.re * other.re - self.im * other.im
        im = self.re * other.im + self.im * other.re
        return ComplexInterval(re, im)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> ComplexInterval:
        if isinstance(other, RealInterval) or (
            not isinstance(other, ComplexInterval) and not np.iscomplexobj(other)
        ):
            other = _to_real(other)
            return ComplexInterval(self.re / other, self.im / other)
        other = _to_complex(other)
        denominator = other.re.sqr() + other.im.sqr()
        if np.any(denominator.lo <= 0):
            msg = "Division by a complex interval that contains zero"
            raise DomainError(msg)
        numerator = self * other.conj()
        return ComplexInterval(numerator.re / denominator, numerator.im / denominator)

    def __rtruediv__(self, other: Any) -> ComplexInterval:
        return _to_complex(other) / self

    def __pow__(self, exponent: int) -> ComplexInterval:
        if not isinstance(exponent, (int, np.integer)) or exponent < 0:
            msg = f"Only nonnegative integer powers are supported, got {exponent}"
            raise TypeError(msg)
        result = ComplexInterval.point(np.ones(self.shape, dtype=complex))
        for _ in range(int(exponent)):
            result = result * self
        return result

    def __matmul__(self, other: Any) -> ComplexInterval:
        return matmul(self, _to_complex(other))

    def __rmatmul__(self, other: Any) -> ComplexInterval:
        return matmul(_to_complex(other), self)

    def sum(self, axis: int | tuple[int, ...] | None = None) -> ComplexInterval:
        return ComplexInterval(self.re.sum(axis), self.im.sum(axis))

    def hull(self, other: ComplexInterval) -> ComplexInterval:
        return ComplexInterval(
            RealInterval.hull(self.re, other.re), RealInterval.hull(self.im, other.im)
        )

    def widen(self, radius: Any) -> ComplexInterval:
        """Add a disk of the given radius (rounded outward to a rectangle)."""
        radius = np.asarray(radius, dtype=float)
        pad = RealInterval(-radius, radius)
        return ComplexInterval(self.re + pad, self.im + pad)

    def __repr__(self) -> str:
        if self.ndim == 0:
            return f"ComplexInterval(re={self.re!r}, im={self.im!r})"
        return f"ComplexInterval(shape={self.shape})"


IntervalMatrix = ComplexInterval
"""Two-dimensional `ComplexInterval`; products go through `matmul`."""


def matmul(a: ComplexInterval, b: ComplexInterval) -> ComplexInterval:
    """Enclosure of the matrix product evaluated in midpoint-radius form."""
    center_a, radius_a = a.midrad()
    center_b, radius_b = b.midrad()
    abs_a = _add_up(np.abs(center_a.real), np.abs(center_a.imag))
    abs_b = _add_up(np.abs(center_b.real), np.abs(center_b.imag))
    n = center_a.shape[-1]
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        center = center_a @ center_b
    rounding = mul_upper(matmul_upper(abs_a, abs_b), 2 * _gamma(2 * n + 2))
    radius = add_upper(
        add_upper(rounding, matmul_upper(abs_a, radius_b)),
        add_upper(matmul_upper(radius_a, abs_b), matmul_upper(radius_a, radius_b)),
    )
    return ComplexInterval.from_midrad(center, radius)


def mag(x: RealInterval | ComplexInterval) -> np.ndarray:
    """Upper bound of the modulus over each enclosure."""
    return x.mag()


def mig(x: RealInterval | ComplexInterval) -> np.ndarray:
    """Lower bound of the modulus over each enclosure."""
    return x.mig()


def modulus(z: ComplexInterval) -> RealInterval:
    squared = z.re.sqr() + z.im.sqr()
    return sqrt(RealInterval(np.maximum(squared.lo, 0.0), squared.hi))


def sqrt(x: RealInterval) -> RealInterval:
    x = _to_real(x)
    if np.any(x.lo < 0):
        msg = "Square root of an interval with negative values"
        raise DomainError(msg)
    return RealInterval(_sqrt_bounds(x.lo)[0], _sqrt_bounds(x.hi)[1])


PI = RealInterval(float.fromhex("0x1.921fb54442d18p+1"), float.fromhex("0x1.921fb54442d19p+1"))
HALF_PI = RealInterval(
    float.fromhex("0x1.921fb54442d18p+0"), float.fromhex("0x1.921fb54442d19p+0")
)
LN2 = RealInterval(float.fromhex("0x1.62e42fefa39efp-1"), float.fromhex("0x1.62e42fefa39f0p-1"))
_TWO_PI = PI * 2.0


def _factorial_interval(n: int) -> RealInterval:
    return RealInterval(_down(np.float64(math.factorial(n))), _up(np.float64(math.factorial(n))))


def _taylor_remainder(radius: np.ndarray, order: int, scale: float = 1.0) -> np.ndarray:
    """Upper bound of scale·radius**order / order!."""
    power = RealInterval.point(radius) ** order
    return (power * scale / _factorial_interval(order)).hi


def _exp_points(x: np.ndarray) -> RealInterval:
    x = np.asarray(x, dtype=float)
    overflow = x > 709.0
    underflow = x < -744.0
    safe_x = np.where(overflow | underflow | ~np.isfinite(x), 0.0, x)
    k = np.rint(safe_x / float(LN2.mid))
    r = RealInterval.point(safe_x) - LN2 * k
    series = RealInterval.point(np.ones_like(safe_x))
    for j in range(_TAYLOR_DEGREE, 0, -1):
        series = 1.0 + (r / float(j)) * series
    remainder = _taylor_remainder(r.mag(), _TAYLOR_DEGREE + 1, scale=2.0)
    series += RealInterval(-remainder, remainder)
    with np.errstate(over="ignore", under="ignore"):
        lo = np.ldexp(series.lo, k.astype(int))
        hi = np.ldexp(series.hi, k.astype(int))
    tiny = 2.0**-1021
    lo = np.where(lo < tiny, _down(lo), lo)
    hi = np.where(hi < tiny, _up(hi), hi)
    lo = np.where(overflow, _MAX, np.maximum(lo, 0.0))
    hi = np.where(overflow, np.inf, hi)
    lo = np.where(underflow, 0.0, lo)
    hi = np.where(underflow, _ETA, hi)
    lo = np.where(x == np.inf, _MAX, np.where(x == -np.inf, 0.0, lo))
    hi = np.where(x == np.inf, np.inf, np.where(x == -np.inf, 0.0, hi))
    return RealInterval(*_clamp(lo, hi))


def exp(x: RealInterval | ComplexInterval) -> Any:
    """Enclosure of the exponential function.

    >>> y = exp(RealInterval.point(0.0))
    >>> float(y.lo), float(y.hi)
    (1.0, 1.0)
    """
    if isinstance(x, ComplexInterval):
        modulus_part = exp(x.re)
        return ComplexInterval(modulus_part * cos(x.im), modulus_part * sin(x.im))
    x = _to_real(x)
    return RealInterval(_exp_points(x.lo).lo, _exp_points(x.hi).hi)


def _log_points(x: np.ndarray) -> RealInterval:
    """Bracket the logarithm of positive finite points by testing with `exp`."""
    guess = np.log(x)
    step = 4 * np.spacing(np.abs(guess)) + 2.0**-50
    lo = guess - step
    hi = guess + step
    for _ in range(64):
        too_high = _exp_points(lo).hi > x
        too_low = _exp_points(hi).lo < x
        if not np.any(too_high) and not np.any(too_low):
            return RealInterval(lo, hi)
        step = np.where(too_high | too_low, 2 * step, step)
        lo = np.where(too_high, guess - step, lo)
        hi = np.where(too_low, guess + step, hi)
    msg = "Could not bracket the logarithm"
    raise DomainError(msg)


def log(x: RealInterval) -> RealInterval:
    """Enclosure of the natural logarithm of a positive interval."""
    x = _to_real(x)
    if np.any(x.lo <= 0):
        msg = "Logarithm of an interval with nonpositive values"
        raise DomainError(msg)
    finite_hi = np.where(np.isinf(x.hi), 1.0, x.hi)
    lo = _log_points(x.lo).lo
    hi = np.where(np.isinf(x.hi), np.inf, _log_points(finite_hi).hi)
    return RealInterval(lo, hi)


def _sin_cos_reduced(r: RealInterval) -> tuple[RealInterval, RealInterval]:
    r2 = r.sqr()
    sin_series = RealInterval.point(np.ones(r.shape))
    cos_series = RealInterval.point(np.ones(r.shape))
    for j in range(_TAYLOR_DEGREE, 0, -1):
        sin_series = 1.0 - r2 / float((2 * j) * (2 * j + 1)) * sin_series
        cos_series = 1.0 - r2 / float((2 * j - 1) * (2 * j)) * cos_series
    sin_r = r * sin_series
    mag = r.mag()
    sin_rem = _taylor_remainder(mag, 2 * _TAYLOR_DEGREE + 3)
    cos_rem = _taylor_remainder(mag, 2 * _TAYLOR_DEGREE + 2)
    return (
        sin_r + RealInterval(-sin_rem, sin_rem),
        cos_series + RealInterval(-cos_rem, cos_rem),
    )


def _cos_points(x: np.ndarray) -> RealInterval:
    x = np.asarray(x, dtype=float)
    k = np.rint(x / float(HALF_PI.mid))
    r = RealInterval.point(x) - HALF_PI * k
    sin_r, cos_r = _sin_cos_reduced(r)
    quadrant = np.mod(k, 4).astype(int)
    lo = np.choose(quadrant, [cos_r.lo, -sin_r.hi, -cos_r.hi, sin_r.lo])
    hi = np.choose(quadrant, [cos_r.hi, -sin_r.lo, -cos_r.lo, sin_r.hi])
    return RealInterval(np.clip(lo, -1.0, 1.0), np.clip(hi, -1.0, 1.0))


def cos(x: RealInterval) -> RealInterval:
    """Enclosure of the cosine, including interior extrema."""
    x = _to_real(x)
    if np.any(~np.isfinite(x.lo)) or np.any(~np.isfinite(x.hi)):
        unbounded = ~np.isfinite(x.lo) | ~np.isfinite(x.hi)
        finite = RealInterval(np.where(unbounded, 0.0, x.lo), np.where(unbounded, 0.0, x.hi))
        result = cos(finite)
        return RealInterval(
            np.where(unbounded, -1.0, result.lo), np.where(unbounded, 1.0, result.hi)
        )
    at_lo = _cos_points(x.lo)
    at_hi = _cos_points(x.hi)
    lo = np.minimum(at_lo.lo, at_hi.lo)
    hi = np.maximum(at_lo.hi, at_hi.hi)
    first = np.ceil((RealInterval.point(x.lo) / PI).lo)
    last = np.floor((RealInterval.point(x.hi) / PI).hi)
    count = last - first + 1
    has_even = (count >= 2) | ((count == 1) & (np.mod(first, 2) == 0))
    has_odd = (count >= 2) | ((count == 1) & (np.mod(first, 2) == 1))
    hi = np.where(has_even, 1.0, hi)
    lo = np.where(has_odd, -1.0, lo)
    return RealInterval(lo, hi)


def sin(x: RealInterval) -> RealInterval:
    """Enclosure of the sine via ``sin(x) = cos(x − π/2)``."""
    return cos(_to_real(x) - HALF_PI)


def _arctan_points(x: np.ndarray) -> RealInterval:
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    large = ax > 1
    reciprocal = RealInterval.point(1.0) / RealInterval.point(np.where(large, ax, 1.0))
    y = RealInterval(np.where(large, reciprocal.lo, ax), np.where(large, reciprocal.hi, ax))
    y = RealInterval(np.maximum(y.lo, 0.0), y.hi)
    z = y / (1.0 + sqrt(1.0 + y.sqr()))
    z2 = z.sqr()
    series = RealInterval.point(np.zeros(x.shape))
    n_terms = 2 * _TAYLOR_DEGREE
    for j in range(n_terms, -1, -1):
        sign = -1.0 if j % 2 else 1.0
        series = RealInterval.point(sign) / float(2 * j + 1) + z2 * series
    remainder = (RealInterval.point(z.mag()) ** (2 * n_terms + 3) / float(2 * n_terms + 3)).hi
    half_angle = z * series + RealInterval(-remainder, remainder)
    value = half_angle * 2.0
    value = RealInterval(
        np.where(large, (HALF_PI - value).lo, value.lo),
        np.where(large, (HALF_PI - value).hi, value.hi),
    )
    negative = x < 0
    return RealInterval(
        np.where(negative, -value.hi, value.lo), np.where(negative, -value.lo, value.hi)
    )


def arctan(x: RealInterval) -> RealInterval:
    x = _to_real(x)
    return RealInterval(_arctan_points(x.lo).lo, _arctan_points(x.hi).hi)


def arg(z: ComplexInterval) -> RealInterval:
    """Enclosure of a continuous branch of the argument over each rectangle.

    Rectangles in the right half plane get values in (−π/2, π/2), the upper and lower
    half planes around ±π/2, and rectangles left of the imaginary axis values around
    π (so that the negative real axis is not cut). Rectangles containing zero get
    [−π, π].
    """
    flat_re = z.re.reshape(-1)
    flat_im = z.im.reshape(-1)
    flat_lo = np.empty(z.size)
    flat_hi = np.empty(z.size)
    for index in range(z.size):
        value = _scalar_arg(flat_re[index], flat_im[index])
        flat_lo[index] = float(value.lo)
        flat_hi[index] = float(value.hi)
    return RealInterval(flat_lo.reshape(z.shape), flat_hi.reshape(z.shape))


def _scalar_arg(re: RealInterval, im: RealInterval) -> RealInterval:
    if re.lo > 0:
        return arctan(im / re)
    if im.lo > 0:
        return HALF_PI - arctan(re / im)
    if im.hi < 0:
        return -HALF_PI - arctan(re / im)
    if re.hi < 0:
        return PI + arctan(im / re)
    return RealInterval(-PI.hi, PI.hi)


_ARITHMETIC: dict[str, Callable[[Any, Any], Any]] = {
    "add": lambda x, y: x + y,
    "sub": lambda x, y: x - y,
    "mul": lambda x, y: x * y,
    "div": lambda x, y: x / y,
}
_ELEMENTARY: dict[str, Callable[[Any], Any]] = {
    "exp": exp,
    "log": log,
    "sqrt": sqrt,
    "arctan": arctan,
    "sin": sin,
    "cos": cos,
    "abs": abs,
    "complex-modulus": modulus,
}

Operation = Literal["add", "sub", "mul", "div"]
Elementary = Literal["exp", "log", "sqrt", "arctan", "sin", "cos", "abs", "complex-modulus"]
Interval = Union[RealInterval, ComplexInterval]


def arith(op: Operation, x: Interval, y: Interval) -> Interval:
    """Apply one of the four arithmetic operations by name."""
    if op not in _ARITHMETIC:
        msg = f'Unknown arithmetic operation "{op}"'
        raise ValueError(msg)
    return _ARITHMETIC[op](x, y)


def elem(name: Elementary, x: Interval) -> Interval:
    """Apply an elementary function by name."""
    if name not in _ELEMENTARY:
        msg = f'Unknown elementary function "{name}"'
        raise ValueError(msg)
    return _ELEMENTARY[name](x)
