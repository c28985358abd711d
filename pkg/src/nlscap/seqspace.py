"""Weighted sequence space ℓ¹_ν of cosine-symmetric Fourier coefficients.

A sequence ``a`` with ``a_{-k} = a_k`` is stored through its coefficients for
``k = 0..K`` and measured in the norm ``|a|_ν = |a_0| + 2 Σ_{k≥1} |a_k| ν^k``, that is with
weights ``ω_0 = 1`` and ``ω_k = 2ν^k``. The space is a Banach algebra under the discrete
convolution, which is the coefficient-side image of the product of two functions.

>>> a = CosineSeq.from_point(1.0, [0.0, 1.0])
>>> square = conv(a, a)
>>> square.contains(CosineSeq.from_point(1.0, [2.0, 0.0, 1.0]))
True
"""

from __future__ import annotations

from functools import lru_cache
from typing import Any

import numpy as np
from attrs import field, frozen
from attrs.validators import ge

from nlscap.interval import (
    ComplexInterval,
    RealInterval,
    add_upper,
    div_upper,
    mul_upper,
    sum_upper,
)
from nlscap.interval import _gamma as gamma_constant  # noqa: PLC2701
from nlscap.interval import _product_error as product_error  # noqa: PLC2701

_UNIT_ROUNDOFF = 2.0**-53
_ETA = 2.0**-1074


class UsageError(ValueError):
    """Sequences combined or bounded outside of their preconditions."""


@lru_cache(maxsize=64)
def weights(nu: float, size: int) -> RealInterval:
    """Enclosures of the weights ``ω_0 = 1`` and ``ω_k = 2ν^k`` for ``k < size``.

    >>> w = weights(1.0, 3)
    >>> w.lo.tolist()
    [1.0, 2.0, 2.0]
    """
    lo = np.ones(size)
    hi = np.ones(size)
    power = RealInterval.point(1.0)
    for k in range(1, size):
        power *= nu
        lo[k] = float((power * 2.0).lo)
        hi[k] = float((power * 2.0).hi)
    return RealInterval(lo, hi)


def _as_coefficients(value: Any) -> ComplexInterval:
    if isinstance(value, ComplexInterval):
        coefficients = value
    elif isinstance(value, RealInterval):
        coefficients = value.to_complex()
    else:
        coefficients = ComplexInterval.point(np.asarray(value, dtype=complex))
    if coefficients.ndim != 1 or coefficients.size == 0:
        msg = f"Coefficients must be a non-empty one-dimensional array, got shape {coefficients.shape}"
        raise ValueError(msg)
    return coefficients


def _as_tail(value: Any) -> float:
    tail = float(value.hi) if isinstance(value, RealInterval) else float(value)
    if not tail >= 0:
        msg = f"Tail bound must be nonnegative, got {tail}"
        raise ValueError(msg)
    return tail


@frozen(eq=False)
class CosineSeq:
    """Enclosure of a cosine-symmetric sequence in ℓ¹_ν.

    Represents the set of sequences ``c + e`` where ``c_k`` lies in ``coeffs[k]`` and ``e``
    is any sequence supported on ``k ≥ 1`` with ``|e|_ν ≤ tail``.
    """

    nu: float = field(converter=float, validator=ge(1.0))
    coeffs: ComplexInterval = field(converter=_as_coefficients)
    tail: float = field(default=0.0, converter=_as_tail)

    @classmethod
    def from_point(cls, nu: float, values: Any, tail: float = 0.0) -> CosineSeq:
        return cls(nu, ComplexInterval.point(np.asarray(values, dtype=complex)), tail)

    @classmethod
    def zeros(cls, nu: float, size: int) -> CosineSeq:
        return cls(nu, ComplexInterval.zeros(size))

    @property
    def size(self) -> int:
        return self.coeffs.size

    @property
    def n_modes(self) -> int:
        """Largest Fourier index with a stored coefficient."""
        return self.coeffs.size - 1

    @property
    def mid(self) -> np.ndarray:
        return self.coeffs.mid

    def weights(self) -> RealInterval:
        return weights(self.nu, self.size)

    def identical(self, other: object) -> bool:
        if not isinstance(other, CosineSeq):
            return False
        return (
            self.nu == other.nu
            and self.tail == other.tail
            and self.coeffs.identical(other.coeffs)
        )

    def contains(self, other: CosineSeq) -> bool:
        """Whether every sequence of ``other`` lies in this enclosure."""
        if other.tail > self.tail:
            return False
        size = max(self.size, other.size)
        mine = self.pad(size).coeffs
        theirs = other.pad(size).coeffs
        return bool(np.all(mine.contains(theirs)))

    def pad(self, size: int) -> CosineSeq:
        """Extend the coefficients with zeros up to ``size`` entries."""
        if size <= self.size:
            return self
        extra = ComplexInterval.zeros(size - self.size)
        return CosineSeq(
            self.nu,
            ComplexInterval(
                RealInterval(
                    np.concatenate([self.coeffs.re.lo, extra.re.lo]),
                    np.concatenate([self.coeffs.re.hi, extra.re.hi]),
                ),
                RealInterval(
                    np.concatenate([self.coeffs.im.lo, extra.im.lo]),
                    np.concatenate([self.coeffs.im.hi, extra.im.hi]),
                ),
            ),
            self.tail,
        )

    def truncate(self, size: int) -> CosineSeq:
        """Keep ``size`` coefficients and move the rest into the tail bound."""
        if size >= self.size:
            return self
        dropped = self.coeffs[size:]
        spill = _weighted_sum_upper(dropped.mag(), self.nu, offset=size)
        return CosineSeq(self.nu, self.coeffs[:size], add_upper(self.tail, spill))

    def with_tail(self, tail: float) -> CosineSeq:
        return CosineSeq(self.nu, self.coeffs, tail)

    def conj(self) -> CosineSeq:
        return CosineSeq(self.nu, self.coeffs.conj(), self.tail)

    def __neg__(self) -> CosineSeq:
        return CosineSeq(self.nu, -self.coeffs, self.tail)

    def __add__(self, other: CosineSeq) -> CosineSeq:
        _check_weights(self, other)
        size = max(self.size, other.size)
        return CosineSeq(
            self.nu,
            self.pad(size).coeffs + other.pad(size).coeffs,
            add_upper(self.tail, other.tail),
        )

    def __sub__(self, other: CosineSeq) -> CosineSeq:
        return self + (-other)

    def __mul__(self, scalar: Any) -> CosineSeq:
        """Multiplication by a complex scalar enclosure."""
        if isinstance(scalar, CosineSeq):
            return NotImplemented
        scalar = (
            scalar
            if isinstance(scalar, (ComplexInterval, RealInterval))
            else ComplexInterval.point(scalar)
        )
        return CosineSeq(
            self.nu, self.coeffs * scalar, mul_upper(self.tail, scalar.mag())
        )

    __rmul__ = __mul__

    def values(self, x: Any) -> np.ndarray:
        """Approximate function values ``a_0 + 2 Σ a_k cos(2πkx)`` from the midpoints."""
        x = np.asarray(x, dtype=float)
        k = np.arange(1, self.size)
        modes = np.cos(2 * np.pi * np.multiply.outer(x, k))
        mid = self.mid
        return mid[0] + 2 * modes @ mid[1:]


@frozen(eq=False)
class DualSeq:
    """Enclosure of a sequence measured in the dual norm ``|·|_{∞,ν^{-1}}``.

    ``tail`` bounds ``|c_k|/ω_k`` for all indices beyond the stored coefficients.
    """

    nu: float = field(converter=float, validator=ge(1.0))
    coeffs: ComplexInterval = field(converter=_as_coefficients)
    tail: float = field(default=0.0, converter=_as_tail)

    @classmethod
    def from_point(cls, nu: float, values: Any, tail: float = 0.0) -> DualSeq:
        return cls(nu, ComplexInterval.point(np.asarray(values, dtype=complex)), tail)


def _check_weights(a: CosineSeq | DualSeq, b: CosineSeq | DualSeq) -> None:
    if a.nu != b.nu:
        msg = f"Sequences live in different spaces: ν = {a.nu} and ν = {b.nu}"
        raise UsageError(msg)


def _weighted_sum_upper(magnitudes: np.ndarray, nu: float, offset: int = 0) -> np.ndarray:
    """Upper bound of ``Σ_k magnitudes[..., k] ω_{k+offset}`` along the last axis."""
    w = weights(nu, offset + magnitudes.shape[-1]).hi[offset:]
    return sum_upper(mul_upper(magnitudes, w), axis=-1)


def coefficient_norm_upper(a: CosineSeq) -> float:
    """Upper bound of the norm of the stored coefficients, tail excluded."""
    return float(_weighted_sum_upper(a.coeffs.mag(), a.nu))


def nu_norm(a: CosineSeq) -> RealInterval:
    """Enclosure of ``|a|_ν``, the tail bound entering the upper end only.

    >>> a = CosineSeq.from_point(2.0, [1.0, 0.5])
    >>> round(float(nu_norm(a).lo), 12), round(float(nu_norm(a).hi), 12)
    (3.0, 3.0)
    """
    moduli = RealInterval(a.coeffs.mig(), a.coeffs.mag())
    total = (moduli * a.weights()).sum()
    upper = add_upper(total.hi, a.tail)
    lower = max(0.0, float((total - a.tail).lo))
    return RealInterval(lower, upper)


def dual_norm(c: DualSeq) -> RealInterval:
    """Enclosure of ``max(|c_0|, sup_k |c_k|/ω_k)``, the tail entering the upper end."""
    moduli = RealInterval(c.coeffs.mig(), c.coeffs.mag())
    scaled = (moduli / weights(c.nu, c.coeffs.size)).max()
    return RealInterval(float(scaled.lo), max(float(scaled.hi), c.tail))


def pairing_bound(c: DualSeq, a: CosineSeq) -> RealInterval:
    """Bound of ``|Σ_{k≥0} c_k a_k|`` through ``dual_norm(c)·nu_norm(a)``."""
    _check_weights(c, a)
    return RealInterval(0.0, mul_upper(dual_norm(c).hi, nu_norm(a).hi))


def overlap_counts(size_x: int, size_y: int) -> np.ndarray:
    """Number of products ``x_l y_{k-l}`` in each entry of a full convolution.

    >>> overlap_counts(3, 2)
    array([1, 2, 2, 1])
    """
    return np.convolve(np.ones(size_x, dtype=int), np.ones(size_y, dtype=int))


def rounding_constants(counts: np.ndarray) -> np.ndarray:
    """Elementwise `gamma_constant` for an array of summand counts."""
    counts = np.asarray(counts, dtype=int)
    values, inverse = np.unique(counts, return_inverse=True)
    constants = np.array([gamma_constant(int(n)) for n in values])
    return constants[inverse].reshape(counts.shape)


def _with_rounding(raw: np.ndarray, counts: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore", under="ignore"):
        scaled = np.nextafter(raw * (1 + 2 * rounding_constants(counts)), np.inf)
        return scaled + (counts + 1) * _ETA


def convolve_upper(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Upper bound of the full discrete convolution of nonnegative float arrays."""
    with np.errstate(over="ignore", under="ignore"):
        raw = np.convolve(x, y)
    return _with_rounding(raw, overlap_counts(x.shape[-1], y.shape[-1]))


def symmetric_extension(values: Any, axis: int = -1) -> Any:
    """Two-sided coefficients ``(v_K, …, v_1, v_0, v_1, …, v_K)`` along ``axis``."""
    if isinstance(values, ComplexInterval):
        return ComplexInterval(
            RealInterval(
                symmetric_extension(values.re.lo, axis),
                symmetric_extension(values.re.hi, axis),
            ),
            RealInterval(
                symmetric_extension(values.im.lo, axis),
                symmetric_extension(values.im.hi, axis),
            ),
        )
    values = np.asarray(values)
    mirrored = np.flip(np.take(values, np.arange(1, values.shape[axis]), axis=axis), axis=axis)
    return np.concatenate([mirrored, values], axis=axis)


def convolve2d(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Full two-dimensional discrete convolution in floating point."""
    rows_p, cols_p = p.shape
    rows_q, cols_q = q.shape
    columns = cols_p + cols_q - 1
    lag = np.arange(columns)[:, None] - np.arange(cols_q)[None, :]
    valid = (lag >= 0) & (lag < cols_p)
    toeplitz = np.where(valid, p[:, np.clip(lag, 0, cols_p - 1)], 0)
    result = np.zeros((rows_p + rows_q - 1, columns), dtype=np.result_type(p, q))
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        for row in range(rows_p):
            result[row : row + rows_q] += q @ toeplitz[row].T
    return result


def _convolve2d_counts(
    shape_p: tuple[int, ...], shape_q: tuple[int, ...], products: int = 1
) -> np.ndarray:
    """Rounding steps per entry of `convolve2d`.

    Each entry sums the row dot products, whose zero padding adds exactly, so it
    sees ``products·columns + rows`` roundings. Complex products count twice.
    """
    rows = overlap_counts(shape_p[0], shape_q[0])
    columns = overlap_counts(shape_p[1], shape_q[1])
    return products * columns[None, :] + rows[:, None]


def convolve2d_upper(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Upper bound of `convolve2d` for nonnegative float arrays."""
    return _with_rounding(convolve2d(p, q), _convolve2d_counts(p.shape, q.shape))


def convolve2d_enclosure(p: ComplexInterval, q: ComplexInterval) -> ComplexInterval:
    """Enclosure of the full two-dimensional convolution of interval grids.

    The grids are convolved in midpoint-radius form; the radius collects the a-priori
    rounding error of the center product and the products involving input radii.
    """
    center_p, radius_p = p.midrad()
    center_q, radius_q = q.midrad()
    abs_p = add_upper(np.abs(center_p.real), np.abs(center_p.imag))
    abs_q = add_upper(np.abs(center_q.real), np.abs(center_q.imag))
    center = convolve2d(center_p, center_q)
    counts = _convolve2d_counts(p.shape, q.shape, products=2)
    rounding = mul_upper(convolve2d_upper(abs_p, abs_q), rounding_constants(counts))
    rounding = add_upper(rounding, (counts + 1) * _ETA)
    radius = add_upper(
        add_upper(rounding, convolve2d_upper(abs_p, radius_q)),
        add_upper(convolve2d_upper(radius_p, abs_q), convolve2d_upper(radius_p, radius_q)),
    )
    return ComplexInterval.from_midrad(center, radius)


def _two_sum(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def compensated_row_sums(
    left: np.ndarray, right: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Row sums of ``left * right`` as if computed in twice the working precision.

    Returns the sums and upper bounds of their errors. Products are split exactly and
    accumulated with error-free additions, so the error is ``u|sum|`` plus a term in
    ``γ_n²``.

    >>> value, error = compensated_row_sums(
    ...     np.array([[1e16, 1.0, -1e16]]), np.array([[1.0, 1.0, 1.0]])
    ... )
    >>> float(value[0]), bool(error[0] < 1e-13)
    (1.0, True)
    """
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        products = left * right
        errors = product_error(left, right, products)
    exact = (left == 0) | (right == 0)
    unknown = ~exact & ~np.isfinite(errors)
    errors = np.where(exact | unknown, 0.0, errors)
    total = np.zeros(products.shape[0])
    correction = np.zeros(products.shape[0])
    with np.errstate(over="ignore", invalid="ignore"):
        for column in range(products.shape[1]):
            total, error = _two_sum(total, products[:, column])
            correction = correction + (error + errors[:, column])
        value = total + correction
    n = products.shape[1]
    spread = sum_upper(np.abs(products), axis=1)
    bound = add_upper(
        mul_upper(2 * _UNIT_ROUNDOFF, np.abs(value)),
        mul_upper(2 * gamma_constant(n) ** 2, spread),
    )
    unsplit = add_upper(mul_upper(2 * _UNIT_ROUNDOFF, np.abs(products)), 2 * _ETA)
    unsplit = np.where(unknown, unsplit, 0.0)
    bound = add_upper(bound, sum_upper(unsplit, axis=1))
    return value, add_upper(bound, 4 * (n + 1) * _ETA)


def _convolve_compensated(
    x: np.ndarray, y: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Full convolution of complex vectors with `compensated_row_sums`."""
    size = x.size + y.size - 1
    lag = np.arange(size)[:, None] - np.arange(x.size)[None, :]
    shifted = np.where((lag >= 0) & (lag < y.size), y[np.clip(lag, 0, y.size - 1)], 0)
    left = np.broadcast_to(x, shifted.shape)
    real, real_error = compensated_row_sums(
        np.concatenate([left.real, -left.imag], axis=1),
        np.concatenate([shifted.real, shifted.imag], axis=1),
    )
    imag, imag_error = compensated_row_sums(
        np.concatenate([left.real, left.imag], axis=1),
        np.concatenate([shifted.imag, shifted.real], axis=1),
    )
    return real + 1j * imag, np.maximum(real_error, imag_error)


def conv(a: CosineSeq, b: CosineSeq) -> CosineSeq:
    """Enclosure of the symmetric discrete convolution ``(a*b)_k``.

    Finite parts are convolved in midpoint-radius form. Products with the tails are
    bounded in norm by the Banach algebra estimate; their zero-mode part widens the
    first coefficient.
    """
    _check_weights(a, b)
    center_a, radius_a = a.coeffs.midrad()
    center_b, radius_b = b.coeffs.midrad()
    ext_ca = symmetric_extension(center_a)
    ext_cb = symmetric_extension(center_b)
    abs_a = symmetric_extension(add_upper(np.abs(center_a.real), np.abs(center_a.imag)))
    abs_b = symmetric_extension(add_upper(np.abs(center_b.real), np.abs(center_b.imag)))
    ext_ra = symmetric_extension(radius_a)
    ext_rb = symmetric_extension(radius_b)
    center, rounding = _convolve_compensated(ext_ca, ext_cb)
    radius = add_upper(
        add_upper(rounding, convolve_upper(abs_a, ext_rb)),
        add_upper(convolve_upper(ext_ra, abs_b), convolve_upper(ext_ra, ext_rb)),
    )
    middle = a.n_modes + b.n_modes
    coeffs = ComplexInterval.from_midrad(center[middle:], radius[middle:])
    norm_a = coefficient_norm_upper(a)
    norm_b = coefficient_norm_upper(b)
    cross = add_upper(
        add_upper(mul_upper(norm_a, b.tail), mul_upper(a.tail, norm_b)),
        mul_upper(a.tail, b.tail),
    )
    if cross > 0:
        zero_mode = coeffs[:1].widen(cross)
        coeffs = _replace_first(coeffs, zero_mode)
    return CosineSeq(a.nu, coeffs, float(cross))


def _replace_first(values: ComplexInterval, first: ComplexInterval) -> ComplexInterval:
    re_lo = np.array(values.re.lo)
    re_hi = np.array(values.re.hi)
    im_lo = np.array(values.im.lo)
    im_hi = np.array(values.im.hi)
    re_lo[0], re_hi[0] = first.re.lo[0], first.re.hi[0]
    im_lo[0], im_hi[0] = first.im.lo[0], first.im.hi[0]
    return ComplexInterval.from_rect(re_lo, re_hi, im_lo, im_hi)


def widen_zero_mode(a: CosineSeq, radius: float) -> CosineSeq:
    """Add a disk of the given radius to the zero-mode coefficient."""
    return CosineSeq(a.nu, _replace_first(a.coeffs, a.coeffs[:1].widen(radius)), a.tail)


def psi_upper(magnitudes: np.ndarray, nu: float) -> np.ndarray:
    """Upper bounds of ``Ψ_k`` for ``k = 0..K`` given ``|a_j|`` on the last axis.

    ``Ψ_k(a) = max_{K<ℓ≤k+K} |a_{|k−ℓ|}|/(2ν^ℓ)`` with ``K`` the last stored index.
    """
    magnitudes = np.asarray(magnitudes, dtype=float)
    n_modes = magnitudes.shape[-1] - 1
    w_lo = weights(nu, 2 * n_modes + 2).lo
    result = np.zeros(magnitudes.shape)
    for k in range(1, n_modes + 1):
        j = np.arange(n_modes + 1 - k, n_modes + 1)
        ratios = div_upper(magnitudes[..., j], w_lo[j + k])
        result[..., k] = np.max(ratios, axis=-1)
    return result


def psi_bound(a: CosineSeq, k: int, projection: int) -> RealInterval:
    """Bound of ``sup |(a*v)_k|`` over unit-norm ``v`` supported beyond ``projection``.

    >>> delta = CosineSeq.from_point(1.0, [1.0])
    >>> float(psi_bound(delta, k=2, projection=0).hi)
    0.5
    """
    if a.tail > 0 or a.n_modes > projection:
        msg = (
            f"Ψ estimate needs a finite sequence supported up to index {projection},"
            f" got {a.n_modes} stored modes and tail {a.tail}"
        )
        raise UsageError(msg)
    if k < 0:
        msg = f"Fourier index must be nonnegative, got {k}"
        raise UsageError(msg)
    moduli = RealInterval(a.coeffs.mig(), a.coeffs.mag())
    w = weights(a.nu, projection + k + 1)
    candidates = []
    for ell in range(projection + 1, projection + k + 1):
        j = abs(k - ell)
        if j <= a.n_modes:
            candidates.append(moduli[j] / w[ell])
    if not candidates:
        return RealInterval.point(0.0)
    return RealInterval(
        max(float(c.lo) for c in candidates), max(float(c.hi) for c in candidates)
    )


def op_norm_block(
    gamma_finite: ComplexInterval, gamma_tail: Any, nu: float
) -> RealInterval:
    """Operator norm on ℓ¹_ν of a finite block with a diagonal tail.

    Evaluates ``max(max_j (1/ω_j) Σ_i |Γ_ij| ω_i, |γ_tail|)``.

    >>> block = ComplexInterval.point(np.diag([1.0, -3.0, 2.0]))
    >>> round(float(op_norm_block(block, 0.0, nu=1.0).hi), 12)
    3.0
    """
    moduli = RealInterval(gamma_finite.mig(), gamma_finite.mag())
    w = weights(nu, gamma_finite.shape[0])
    columns = (moduli * RealInterval(w.lo[:, None], w.hi[:, None])).sum(axis=0) / w
    tail = (
        gamma_tail
        if isinstance(gamma_tail, RealInterval)
        else RealInterval.point(np.abs(gamma_tail))
    )
    tail = RealInterval(tail.mig(), tail.mag())
    finite = columns.max()
    return RealInterval(
        max(float(finite.lo), float(tail.lo)), max(float(finite.hi), float(tail.hi))
    )


def op_norm_upper(magnitudes: np.ndarray, nu: float) -> float:
    """Upper-only fast variant of `op_norm_block` for a nonnegative finite block."""
    w = weights(nu, magnitudes.shape[0])
    columns = sum_upper(mul_upper(magnitudes, w.hi[:, None]), axis=0)
    return float(np.max(div_upper(columns, w.lo)))


def convolution_matrix(a: np.ndarray, size: int) -> np.ndarray:
    """Point matrix of ``h ↦ a*h`` restricted to the first ``size`` cosine modes.

    Entries follow ``(a*h)_k = a_k h_0 + Σ_{j≥1} (a_{|k−j|} + a_{k+j}) h_j``.
    """
    a = np.asarray(a, dtype=complex)
    padded = np.zeros(2 * size + 1, dtype=complex)
    padded[: min(a.size, padded.size)] = a[: padded.size]
    k = np.arange(size)[:, None]
    j = np.arange(size)[None, :]
    matrix = padded[np.abs(k - j)] + padded[k + j]
    matrix[:, 0] = padded[:size]
    return matrix
