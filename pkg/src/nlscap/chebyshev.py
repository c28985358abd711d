"""Chebyshev series in time on a step ``J = [0, h]``.

A function on ``J`` is written as ``Σ_n c_n T_n(ξ)`` with ``ξ = 2t/h − 1``. Grids of
coefficients carry the Chebyshev order on axis 0 and, for solutions of the Fourier
system, the cosine modes on axis 1.

>>> derivative_matrix(4).astype(int).tolist()
[[0, 1, 0, 3], [0, 0, 4, 0], [0, 0, 0, 6], [0, 0, 0, 0]]
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from nlscap.interval import PI, ComplexInterval, RealInterval, cos
from nlscap.seqspace import convolve2d_enclosure, symmetric_extension


def nodes(count: int) -> np.ndarray:
    """Chebyshev points of the first kind in increasing order on ``[−1, 1]``.

    >>> np.round(nodes(3), 12).tolist()
    [-0.866025403784, 0.0, 0.866025403784]
    """
    j = np.arange(count)
    return np.cos(np.pi * (2 * count - 1 - 2 * j) / (2 * count))


def basis(xi: np.ndarray, size: int) -> np.ndarray:
    """Values ``T_n(ξ_j)`` for ``n < size`` with rows indexed by ``j``."""
    xi = np.asarray(xi, dtype=float)
    values = np.ones((xi.size, size))
    if size > 1:
        values[:, 1] = xi
    for n in range(2, size):
        values[:, n] = 2 * xi * values[:, n - 1] - values[:, n - 2]
    return values


@lru_cache(maxsize=16)
def derivative_matrix(size: int) -> np.ndarray:
    """Exact matrix ``D`` with ``d/dξ Σ c_n T_n = Σ (Dc)_n T_n``."""
    matrix = np.zeros((size, size))
    for j in range(1, size):
        for n in range(j - 1, -1, -2):
            matrix[n, j] = 2.0 * j
        if j % 2 == 1:
            matrix[0, j] = float(j)
    return matrix


def _concatenate(parts: list[ComplexInterval]) -> ComplexInterval:
    def join(component: str, end: str) -> np.ndarray:
        return np.concatenate([getattr(getattr(p, component), end) for p in parts])

    return ComplexInterval.from_rect(
        join("re", "lo"), join("re", "hi"), join("im", "lo"), join("im", "hi")
    )


def antiderivative(coeffs: ComplexInterval) -> ComplexInterval:
    """Coefficients of ``∫_{−1}^ξ f``, one order higher than ``f``.

    Uses ``C_n = (c_{n−1} − c_{n+1})/(2n)`` with ``c_0`` counted twice in ``C_1``; the
    constant term makes the antiderivative vanish at ``ξ = −1``.
    """
    size = coeffs.shape[0]
    trailing = coeffs.shape[1:]
    padded = _concatenate([coeffs, ComplexInterval.zeros((2, *trailing))])
    factors = np.ones((size, *trailing))
    factors[0] = 2.0
    previous = padded[:size] * factors
    upper = (previous - padded[2 : size + 2]) / RealInterval.point(
        (2.0 * np.arange(1, size + 1)).reshape(-1, *([1] * len(trailing)))
    )
    signs = (-1.0) ** np.arange(1, size + 1)
    constant = -(upper * signs.reshape(-1, *([1] * len(trailing)))).sum(axis=0)
    return _concatenate([constant.reshape(1, *trailing), upper])


def piece_angles(pieces: int) -> RealInterval:
    """Angles ``Θ_j = [θ_{j+1}, θ_j]`` with ``θ_j = π(1 − j/pieces)``.

    The subintervals ``ξ ∈ cos Θ_j`` cover ``[−1, 1]`` in increasing order, finer near
    the ends of the step.
    """
    j = np.arange(pieces + 1, dtype=float)
    theta = PI * (float(pieces) - j) / float(pieces)
    return RealInterval(theta.lo[1:], theta.hi[:-1])


def enclose_pieces(coeffs: ComplexInterval, angles: RealInterval) -> ComplexInterval:
    """Range enclosures of ``Σ c_n T_n`` on every subinterval ``cos Θ_j``."""
    size = coeffs.shape[0]
    orders = np.arange(size, dtype=float)[:, None]
    chebyshev = cos(angles.reshape(1, -1) * orders)
    return (coeffs.reshape(size, 1) * chebyshev).sum(axis=0)


def at_endpoints(coeffs: ComplexInterval) -> tuple[ComplexInterval, ComplexInterval]:
    """Enclosures of the series at ``ξ = −1`` and ``ξ = 1``."""
    signs = (-1.0) ** np.arange(coeffs.shape[0])
    shape = (-1, *([1] * (coeffs.ndim - 1)))
    return (coeffs * signs.reshape(shape)).sum(axis=0), coeffs.sum(axis=0)


def product(p: ComplexInterval, q: ComplexInterval) -> ComplexInterval:
    """Enclosure of the product of two Chebyshev-Fourier grids.

    Halving the nonconstant Chebyshev coefficients turns the product rule
    ``T_a T_b = (T_{a+b} + T_{|a−b|})/2`` into a two-sided convolution, which is
    combined with the cosine convolution in space.
    """
    full = convolve2d_enclosure(_two_sided(p), _two_sided(q))
    rows = p.shape[0] + q.shape[0] - 2
    columns = p.shape[1] + q.shape[1] - 2
    return _one_sided(full[rows:, columns:])


def _two_sided(grid: ComplexInterval) -> ComplexInterval:
    factors = np.full(grid.shape[0], 0.5)
    factors[0] = 1.0
    halved = grid * RealInterval.point(factors[:, None])
    return symmetric_extension(symmetric_extension(halved, axis=1), axis=0)


def _one_sided(grid: ComplexInterval) -> ComplexInterval:
    factors = np.full(grid.shape[0], 2.0)
    factors[0] = 1.0
    return grid * RealInterval.point(factors[:, None])
