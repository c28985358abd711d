"""Randomized enclosure checks at full sample counts against high-precision oracles."""

import mpmath
import numpy as np
import pytest

from nlscap.globalexist import cp_constant, stable_inequality, zeta
from nlscap.integrator import compute_W0, tail_constants
from nlscap.interval import ComplexInterval, RealInterval, arith, elem
from nlscap.seqspace import CosineSeq, conv, nu_norm, op_norm_block

mpmath.mp.prec = 200

_ARITHMETIC_SAMPLES = 125_000
_ELEMENTARY_SAMPLES = 500_000 // 6 + 1

_MP_ARITHMETIC = {
    "add": lambda x, y: x + y,
    "sub": lambda x, y: x - y,
    "mul": lambda x, y: x * y,
    "div": lambda x, y: x / y,
}
_MP_ELEMENTARY = {
    "exp": mpmath.exp,
    "log": mpmath.log,
    "sqrt": mpmath.sqrt,
    "sin": mpmath.sin,
    "cos": mpmath.cos,
    "arctan": mpmath.atan,
}


def _violations(result: RealInterval, exact: list) -> int:
    lo = result.lo.tolist()
    hi = result.hi.tolist()
    return sum(
        not (mpmath.mpf(low) <= value <= mpmath.mpf(high))
        for low, value, high in zip(lo, exact, hi)
    )


def _samples(rng: np.random.Generator, size: int) -> np.ndarray:
    """Mixed magnitudes with random signs."""
    return rng.choice([-1.0, 1.0], size=size) * np.exp(rng.uniform(-20, 20, size=size))


@pytest.mark.slow()
class TestIntervalArithmetic:
    @pytest.mark.parametrize("operation", sorted(_MP_ARITHMETIC))
    def test_arithmetic(self, operation: str):
        rng = np.random.default_rng(seed=sum(map(ord, operation)))
        x = _samples(rng, _ARITHMETIC_SAMPLES)
        y = _samples(rng, _ARITHMETIC_SAMPLES)
        result = arith(operation, RealInterval.point(x), RealInterval.point(y))
        oracle = _MP_ARITHMETIC[operation]
        exact = [oracle(mpmath.mpf(a), mpmath.mpf(b)) for a, b in zip(x.tolist(), y.tolist())]
        assert _violations(result, exact) == 0

    @pytest.mark.parametrize(
        ("name", "low", "high"),
        [
            ("exp", -50.0, 50.0),
            ("log", 1e-8, 1e8),
            ("sqrt", 0.0, 1e6),
            ("sin", -100.0, 100.0),
            ("cos", -100.0, 100.0),
            ("arctan", -1e4, 1e4),
        ],
    )
    def test_elementary(self, name: str, low: float, high: float):
        rng = np.random.default_rng(seed=sum(map(ord, name)))
        x = rng.uniform(low, high, size=_ELEMENTARY_SAMPLES)
        result = elem(name, RealInterval.point(x))
        oracle = _MP_ELEMENTARY[name]
        exact = [oracle(mpmath.mpf(value)) for value in x.tolist()]
        assert _violations(result, exact) == 0


def _exact_cosine_product(a: np.ndarray, b: np.ndarray) -> list:
    """``(a*b)_k = Σ_{k₁+k₂=k} a_{|k₁|} b_{|k₂|}`` in high precision."""
    size = a.size + b.size - 1
    exact = [mpmath.mpc(0) for _ in range(size)]
    for k1 in range(-(a.size - 1), a.size):
        for k2 in range(-(b.size - 1), b.size):
            k = k1 + k2
            if 0 <= k < size:
                left = a[abs(k1)]
                right = b[abs(k2)]
                exact[k] += mpmath.mpc(left.real, left.imag) * mpmath.mpc(
                    right.real, right.imag
                )
    return exact


@pytest.mark.slow()
class TestSequenceSpace:
    def test_banach_algebra(self):
        rng = np.random.default_rng(seed=10)
        for _ in range(10_000):
            sizes = rng.integers(1, 12, size=2)
            nu = float(rng.uniform(1.0, 1.5))
            a = CosineSeq.from_point(
                nu,
                rng.normal(size=sizes[0]) + 1j * rng.normal(size=sizes[0]),
                tail=float(rng.uniform(0, 0.1)),
            )
            b = CosineSeq.from_point(
                nu,
                rng.normal(size=sizes[1]) + 1j * rng.normal(size=sizes[1]),
                tail=float(rng.uniform(0, 0.1)),
            )
            product = nu_norm(conv(a, b))
            assert float(product.lo) <= float(nu_norm(a).hi) * float(nu_norm(b).hi) * (
                1 + 1e-14
            )

    def test_convolution_contains_brute_force(self):
        rng = np.random.default_rng(seed=11)
        for _ in range(500):
            sizes = rng.integers(1, 9, size=2)
            a = rng.normal(size=sizes[0]) + 1j * rng.normal(size=sizes[0])
            b = rng.normal(size=sizes[1]) + 1j * rng.normal(size=sizes[1])
            product = conv(CosineSeq.from_point(1.0, a), CosineSeq.from_point(1.0, b))
            exact = _exact_cosine_product(a, b)
            coeffs = product.coeffs
            for k, value in enumerate(exact):
                assert mpmath.mpf(float(coeffs.re.lo[k])) <= value.real
                assert value.real <= mpmath.mpf(float(coeffs.re.hi[k]))
                assert mpmath.mpf(float(coeffs.im.lo[k])) <= value.imag
                assert value.imag <= mpmath.mpf(float(coeffs.im.hi[k]))

    def test_op_norm_block(self):
        rng = np.random.default_rng(seed=12)
        for _ in range(1_000):
            size = int(rng.integers(1, 5))
            block = rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))
            norm = op_norm_block(ComplexInterval.point(block), 0.0, nu=1.0)
            weights = [1] + [2] * (size - 1)
            columns = [
                sum(
                    mpmath.sqrt(
                        mpmath.mpf(block[i, j].real) ** 2
                        + mpmath.mpf(block[i, j].imag) ** 2
                    )
                    * weights[i]
                    for i in range(size)
                )
                / weights[j]
                for j in range(size)
            ]
            exact = max(columns)
            assert mpmath.mpf(float(norm.lo)) <= exact <= mpmath.mpf(float(norm.hi))
            assert float(norm.hi) - float(norm.lo) <= 1e-14 * float(norm.hi)


@pytest.mark.slow()
class TestHomogeneousDynamics:
    def test_cp_constant_precision(self):
        with mpmath.workdps(50):
            exact = mpmath.exp(-mpmath.pi / 2)
            value = cp_constant(2)
            assert mpmath.mpf(float(value.lo)) <= exact <= mpmath.mpf(float(value.hi))

    def test_zeta_residual(self):
        rng = np.random.default_rng(seed=13)
        step = 1e-4
        for _ in range(100):
            p = int(rng.integers(2, 5))
            angle = rng.uniform(0.05, np.pi / (p - 1) - 0.05)
            z0 = ComplexInterval.point(rng.uniform(0.5, 1.2) * np.exp(1j * angle))
            t = float(rng.uniform(step, 3.0))
            ahead = complex(zeta(t + step, z0, p).mid)
            behind = complex(zeta(t - step, z0, p).mid)
            here = complex(zeta(t, z0, p).mid)
            derivative = (ahead - behind) / (2 * step)
            assert abs(derivative - 1j * here**p) <= 1e-6 * abs(here**p)

    def test_monotone_in_perturbation(self):
        rng = np.random.default_rng(seed=14)
        for _ in range(1_000):
            p = int(rng.integers(2, 5))
            rho0 = float(rng.uniform(0.1, 30.0 if p == 2 else 2.0))
            rho1 = float(np.exp(rng.uniform(-30, 0)))
            r = float(np.exp(rng.uniform(-30, 0)))
            margin = stable_inequality(rho0, rho1, r, p)
            smaller = stable_inequality(rho0, rho1 / 2, r, p)
            if float(margin.hi) < 0:
                assert float(smaller.hi) < 0
            assert float(smaller.lo) <= float(margin.hi)


@pytest.mark.slow()
class TestEvolutionConstants:
    @pytest.mark.parametrize(
        "zero_mode", [[0.0], [25.0], [-25.0], [1j], [0.5j]]
    )
    @pytest.mark.parametrize("h", [2.5e-3, 0.01, 0.1])
    def test_closed_form_zero_modes(self, zero_mode: list, h: float):
        w0 = compute_W0(np.array(zero_mode + [0.0, 0.0], dtype=complex), h)
        assert 1.0 <= w0 <= 1.01

    def test_sampled_integrals(self):
        rng = np.random.default_rng(seed=15)
        for _ in range(1_000):
            norm = float(np.exp(rng.uniform(-3, 4)))
            h = float(rng.uniform(1e-4, 0.05))
            w_inf, bar_w_inf, w_inf_sup = tail_constants(norm, h)
            t, s = sorted(rng.uniform(0, h, size=2))
            growth = 2 * norm * (t - s)
            assert np.exp(growth) <= w_inf_sup * (1 + 1e-12)
            assert np.expm1(growth) / (2 * norm) <= w_inf * (1 + 1e-12)
            double = (np.expm1(growth) / (2 * norm) - (t - s)) / (2 * norm)
            assert double <= bar_w_inf * (1 + 1e-9)
