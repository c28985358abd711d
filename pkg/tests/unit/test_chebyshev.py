import numpy as np
import pytest
from numpy.polynomial import chebyshev as npcheb

from nlscap.chebyshev import (
    antiderivative,
    at_endpoints,
    basis,
    derivative_matrix,
    enclose_pieces,
    nodes,
    piece_angles,
    product,
)
from nlscap.interval import ComplexInterval


def _random_coefficients(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


class TestPointHelpers:
    @pytest.mark.parametrize("count", [1, 4, 13])
    def test_nodes_are_roots(self, count: int):
        roots = nodes(count)
        assert np.all(np.diff(roots) > 0)
        values = npcheb.chebval(roots, [0] * count + [1])
        np.testing.assert_allclose(values, 0.0, atol=1e-13)

    def test_basis(self):
        xi = np.linspace(-1, 1, 7)
        np.testing.assert_allclose(basis(xi, 5), npcheb.chebvander(xi, 4), atol=1e-14)

    @pytest.mark.parametrize("size", [1, 2, 6, 13])
    def test_derivative_matrix(self, size: int):
        rng = np.random.default_rng(size)
        coeffs = rng.normal(size=size)
        expected = np.zeros(size)
        derivative = npcheb.chebder(coeffs) if size > 1 else np.zeros(0)
        expected[: derivative.size] = derivative
        np.testing.assert_allclose(derivative_matrix(size) @ coeffs, expected, atol=1e-12)


class TestAntiderivative:
    def test_matches_numpy(self):
        rng = np.random.default_rng(7)
        coeffs = _random_coefficients(rng, (6,))
        result = antiderivative(ComplexInterval.point(coeffs))
        expected = npcheb.chebint(coeffs, lbnd=-1)
        assert result.shape == (7,)
        np.testing.assert_allclose(result.mid, expected, rtol=1e-13, atol=1e-14)
        assert np.max(result.re.width) < 1e-13

    def test_vanishes_at_left_end(self):
        coeffs = ComplexInterval.point([1.0, 2.0, -0.5j])
        left, _ = at_endpoints(antiderivative(coeffs))
        assert left.contains(0.0)

    def test_grid(self):
        coeffs = np.array([[1.0, 0.0], [0.0, 2.0], [3.0, 0.0]], dtype=complex)
        result = antiderivative(ComplexInterval.point(coeffs))
        assert result.shape == (4, 2)
        for column in range(2):
            expected = npcheb.chebint(coeffs[:, column], lbnd=-1)
            np.testing.assert_allclose(result.mid[:, column], expected, atol=1e-14)


class TestPieces:
    @pytest.mark.parametrize("pieces", [1, 5, 65])
    def test_angles_cover_half_turn(self, pieces: int):
        angles = piece_angles(pieces)
        assert angles.shape == (pieces,)
        assert angles.hi[0] >= np.pi
        assert angles.lo[-1] <= 0.0
        assert np.all(angles.lo[:-1] <= angles.hi[1:])

    def test_enclosures_contain_samples(self):
        rng = np.random.default_rng(3)
        coeffs = _random_coefficients(rng, (5,))
        angles = piece_angles(9)
        ranges = enclose_pieces(ComplexInterval.point(coeffs), angles)
        for j in range(9):
            theta = rng.uniform(angles.lo[j], angles.hi[j], size=20)
            theta = np.clip(theta, 0.0, np.pi)
            values = npcheb.chebval(np.cos(theta), coeffs)
            assert np.all(ranges[j].contains(values))

    def test_endpoints(self):
        coeffs = ComplexInterval.point([1.0, 2.0, 3.0j])
        left, right = at_endpoints(coeffs)
        assert left.contains(-1.0 + 3.0j)
        assert right.contains(3.0 + 3.0j)


class TestProduct:
    def test_single_modes(self):
        # (T_1 · 2cos 2πx)² = (1 + T_2)(1 + cos 4πx)
        grid = np.zeros((2, 2), dtype=complex)
        grid[1, 1] = 1.0
        square = product(ComplexInterval.point(grid), ComplexInterval.point(grid))
        expected = np.zeros((3, 3))
        expected[0, 0] = 1.0
        expected[2, 0] = 1.0
        expected[0, 2] = 0.5
        expected[2, 2] = 0.5
        assert np.all(square.contains(expected))

    @pytest.mark.parametrize(("shape_p", "shape_q"), [((1, 1), (3, 2)), ((4, 3), (2, 5))])
    def test_matches_pointwise_product(self, shape_p, shape_q):
        rng = np.random.default_rng(sum(shape_p) + sum(shape_q))
        p = _random_coefficients(rng, shape_p)
        q = _random_coefficients(rng, shape_q)
        result = product(ComplexInterval.point(p), ComplexInterval.point(q))
        assert result.shape == (
            shape_p[0] + shape_q[0] - 1,
            shape_p[1] + shape_q[1] - 1,
        )
        xi = np.linspace(-1, 1, 9)
        x = np.linspace(0, 0.5, 11)

        def evaluate(grid: np.ndarray) -> np.ndarray:
            in_time = npcheb.chebval(xi, grid).T
            k = np.arange(grid.shape[1])
            cosines = np.cos(2 * np.pi * np.outer(k, x))
            cosines[1:] *= 2
            return in_time @ cosines

        np.testing.assert_allclose(
            evaluate(result.mid), evaluate(p) * evaluate(q), rtol=1e-11, atol=1e-11
        )
