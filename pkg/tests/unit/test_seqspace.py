import numpy as np
import pytest

from nlscap.interval import ComplexInterval, RealInterval
from nlscap.seqspace import (
    CosineSeq,
    DualSeq,
    UsageError,
    conv,
    convolution_matrix,
    convolve2d,
    convolve2d_enclosure,
    dual_norm,
    nu_norm,
    op_norm_block,
    op_norm_upper,
    pairing_bound,
    psi_bound,
    psi_upper,
    symmetric_extension,
    weights,
    widen_zero_mode,
)


def _symmetric_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    extended_a = np.concatenate([a[:0:-1], a])
    extended_b = np.concatenate([b[:0:-1], b])
    full = np.convolve(extended_a, extended_b)
    return full[a.size + b.size - 2 :]


class TestCosineSeq:
    def test_requires_nu_at_least_one(self):
        with pytest.raises(ValueError, match=r"nu"):
            CosineSeq.from_point(0.5, [1.0])

    def test_rejects_negative_tail(self):
        with pytest.raises(ValueError, match=r"nonnegative"):
            CosineSeq.from_point(1.0, [1.0], tail=-1.0)

    def test_truncate_moves_mass_into_tail(self):
        a = CosineSeq.from_point(1.0, [1.0, 0.5, 0.25])
        truncated = a.truncate(2)
        assert truncated.size == 2
        assert truncated.tail >= 0.5
        assert float(nu_norm(truncated).hi) >= float(nu_norm(a).lo)

    def test_addition_pads(self):
        a = CosineSeq.from_point(1.0, [1.0])
        b = CosineSeq.from_point(1.0, [0.0, 2.0], tail=0.1)
        total = a + b
        assert total.size == 2
        assert total.tail >= 0.1
        assert total.contains(CosineSeq.from_point(1.0, [1.0, 2.0]))

    def test_mixed_weights(self):
        with pytest.raises(UsageError, match=r"different spaces"):
            CosineSeq.from_point(1.0, [1.0]) + CosineSeq.from_point(2.0, [1.0])

    def test_scalar_multiplication(self):
        a = CosineSeq.from_point(1.0, [1.0, 1.0], tail=1.0)
        scaled = a * 2j
        assert scaled.contains(CosineSeq.from_point(1.0, [2j, 2j]))
        assert scaled.tail >= 2.0

    def test_values(self):
        a = CosineSeq.from_point(1.0, [1.0, 0.5])
        np.testing.assert_allclose(a.values([0.0, 0.5]), [2.0, 0.0], atol=1e-15)


class TestNorms:
    def test_weights(self):
        w = weights(2.0, 4)
        assert w.lo.tolist() == [1.0, 4.0, 8.0, 16.0]

    def test_nu_norm_with_tail(self):
        a = CosineSeq.from_point(1.0, [1.0, -1.0], tail=0.5)
        norm = nu_norm(a)
        assert float(norm.lo) == pytest.approx(2.5)
        assert float(norm.hi) == pytest.approx(3.5)

    def test_dual_norm(self):
        c = DualSeq.from_point(1.0, [0.5, 4.0, 1.0], tail=0.1)
        assert float(dual_norm(c).hi) == 2.0

    def test_pairing_bound(self):
        c = DualSeq.from_point(1.0, [1.0, 1.0])
        a = CosineSeq.from_point(1.0, [1.0, 1.0])
        exact = abs(1.0 * 1.0 + 2 * 1.0 * 1.0)
        assert float(pairing_bound(c, a).hi) >= exact


class TestConvolution:
    def test_matches_symmetric_product(self):
        rng = np.random.default_rng(seed=1)
        a = rng.normal(size=6) + 1j * rng.normal(size=6)
        b = rng.normal(size=4) + 1j * rng.normal(size=4)
        product = conv(CosineSeq.from_point(1.0, a), CosineSeq.from_point(1.0, b))
        assert product.size == 9
        assert product.tail == 0.0
        assert bool(np.all(product.coeffs.contains(_symmetric_product(a, b))))

    def test_point_product_rounds_once(self):
        rng = np.random.default_rng(seed=6)
        a = rng.normal(size=28) + 1j * rng.normal(size=28)
        sequence = CosineSeq.from_point(1.0, a)
        center, radius = conv(sequence, sequence).coeffs.midrad()
        assert np.all(radius <= 16 * 2.0**-53 * np.abs(center) + 1e-24)
        expected = _symmetric_product(a, a)
        np.testing.assert_allclose(center, expected, rtol=1e-13, atol=1e-13)

    def test_banach_algebra(self):
        a = CosineSeq.from_point(1.0, [0.3, -0.2, 0.1], tail=0.05)
        b = CosineSeq.from_point(1.0, [1.0, 0.5j], tail=0.01)
        product = conv(a, b)
        bound = float(nu_norm(a).hi) * float(nu_norm(b).hi)
        assert float(nu_norm(product).lo) <= bound
        assert product.tail > 0

    def test_function_product(self):
        a = CosineSeq.from_point(1.0, [0.5, 0.25, 0.125])
        square = conv(a, a)
        x = np.linspace(0.0, 1.0, 7)
        np.testing.assert_allclose(square.values(x), a.values(x) ** 2, atol=1e-13)

    def test_widen_zero_mode(self):
        a = CosineSeq.from_point(1.0, [1.0, 2.0])
        widened = widen_zero_mode(a, 0.5)
        assert bool(widened.coeffs[0].contains(1.5))
        assert widened.coeffs[1].identical(a.coeffs[1])

    def test_convolution_matrix(self):
        a = np.array([1.0, 2.0, 3.0])
        h = np.array([0.5, -1.0, 0.25, 0.0])
        matrix = convolution_matrix(a, size=4)
        expected = _symmetric_product(a, h)[:4]
        np.testing.assert_allclose(matrix @ h, expected)

    def test_grid_enclosure(self):
        rng = np.random.default_rng(seed=4)
        p = rng.integers(-5, 5, size=(3, 4)) + 1j * rng.integers(-5, 5, size=(3, 4))
        q = rng.integers(-5, 5, size=(2, 3)) + 1j * rng.integers(-5, 5, size=(2, 3))
        expected = np.zeros((4, 6), dtype=complex)
        for i, j in np.ndindex(p.shape):
            expected[i : i + 2, j : j + 3] += p[i, j] * q
        result = convolve2d_enclosure(ComplexInterval.point(p), ComplexInterval.point(q))
        assert result.shape == (4, 6)
        assert bool(np.all(result.contains(expected)))
        np.testing.assert_allclose(result.mid, expected, atol=1e-12)

    def test_grid_enclosure_with_radii(self):
        p = ComplexInterval.from_midrad(np.array([[1.0, 2.0]]), 0.1)
        q = ComplexInterval.point(np.array([[1.0], [1j]]))
        result = convolve2d_enclosure(p, q)
        assert bool(np.all(result.contains(np.array([[1.1, 1.9], [1.1j, 1.9j]]))))
        assert bool(np.all(result.contains(np.array([[0.9, 2.1], [0.9j, 2.1j]]))))

    def test_grid_rounding_follows_entry_count(self):
        rng = np.random.default_rng(seed=5)
        p = rng.integers(1, 100, size=(151, 55))
        q = rng.integers(1, 100, size=(151, 55))
        exact = convolve2d(p, q).astype(float)
        result = convolve2d_enclosure(
            ComplexInterval.point(p.astype(complex)),
            ComplexInterval.point(q.astype(complex)),
        )
        assert bool(np.all(result.contains(exact)))
        width = result.re.hi - result.re.lo
        unit = 2.0**-53
        assert np.all(width <= 600 * unit * exact)
        assert np.all(width[0] <= 250 * unit * exact[0])

    def test_symmetric_extension_of_intervals(self):
        values = ComplexInterval.point(np.array([[1.0, 2.0j], [3.0, 4.0]]))
        extended = symmetric_extension(values, axis=1)
        np.testing.assert_array_equal(
            extended.mid, [[2.0j, 1.0, 2.0j], [4.0, 3.0, 4.0]]
        )


class TestPsiBounds:
    def test_psi_bound_finite(self):
        a = CosineSeq.from_point(1.0, [1.0, 0.5])
        # v = e_3 / 2 has unit norm; (a*v)_2 = a_1 v_3 = 0.25
        assert float(psi_bound(a, k=2, projection=2).hi) >= 0.25

    def test_psi_bound_preconditions(self):
        with_tail = CosineSeq.from_point(1.0, [1.0], tail=0.1)
        with pytest.raises(UsageError, match=r"finite sequence"):
            psi_bound(with_tail, k=1, projection=3)
        with pytest.raises(UsageError, match=r"nonnegative"):
            psi_bound(CosineSeq.from_point(1.0, [1.0]), k=-1, projection=3)

    def test_psi_upper_agrees_with_scalar_bound(self):
        magnitudes = np.array([1.0, 0.5, 0.25, 0.125])
        a = CosineSeq.from_point(1.0, magnitudes)
        vectorized = psi_upper(magnitudes, nu=1.0)
        for k in range(1, 4):
            scalar = float(psi_bound(a, k=k, projection=3).hi)
            assert vectorized[k] >= scalar * (1 - 1e-15)

    def test_op_norm(self):
        rng = np.random.default_rng(seed=2)
        block = rng.normal(size=(5, 5))
        enclosure = op_norm_block(ComplexInterval.point(block), 0.0, nu=1.0)
        upper = op_norm_upper(np.abs(block), nu=1.0)
        assert upper >= float(enclosure.lo)

    def test_op_norm_tail(self):
        block = ComplexInterval.point(np.eye(2))
        norm = op_norm_block(block, RealInterval.point(4.0), nu=1.0)
        assert float(norm.hi) == 4.0
