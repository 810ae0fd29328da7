"""Model-level checks: cell objects, spectral constants, the certified window."""

import math

import numpy as np
import pytest

from anderloc.errors import DimensionError, SizeGuardError
from anderloc.linalg import is_hamiltonian, is_symplectic
from anderloc.model import (
    DEFAULT_RHO,
    DisorderSpec,
    EnergyInterval,
    ModelParams,
    binary_cells,
    cell_matrix,
    energy_interval,
    generator,
    generator_norm,
    sample_cell,
    sample_path,
    spectral_bounds,
    transfer,
)
from anderloc.seeding import stream


def make_params(n=1, v=None, c=None, ell=0.1, rho=DEFAULT_RHO, disorder=None):
    v = np.zeros((n, n)) if v is None else v
    c = np.ones(n) if c is None else c
    disorder = DisorderSpec.bernoulli() if disorder is None else disorder
    return ModelParams(n=n, v=v, c=c, ell=ell, rho=rho, disorder=disorder)


V0_2 = np.array([[0.0, 1.0], [1.0, 0.0]])


class TestDisorderSpec:
    def test_bernoulli_support(self):
        d = DisorderSpec.bernoulli(0.5)
        assert d.has_binary_support
        assert np.allclose(d.probabilities.sum(), 1.0)

    def test_degenerate_point_law_allowed(self):
        d = DisorderSpec.point(0.0)
        assert not d.has_binary_support

    def test_bad_probabilities_rejected(self):
        with pytest.raises(ValueError):
            DisorderSpec(((0.0, 0.5), (1.0, 0.4)))
        with pytest.raises(ValueError):
            DisorderSpec(((0.0, -0.5), (1.0, 1.5)))


class TestModelParams:
    def test_zero_coupling_rejected(self):
        with pytest.raises(ValueError):
            make_params(c=np.array([0.0]))

    def test_asymmetric_v_rejected(self):
        with pytest.raises(DimensionError):
            make_params(n=2, v=np.array([[0.0, 1.0], [1.1, 0.0]]), c=np.ones(2))

    def test_rho_range(self):
        with pytest.raises(ValueError):
            make_params(rho=1.5)
        with pytest.raises(ValueError):
            make_params(rho=0.0)


class TestCellMatrix:
    def test_all_terms_vanish(self):
        p = make_params()
        assert np.allclose(cell_matrix(p, [0.0], 0.0), [[0.0]], atol=0)

    def test_two_channel_example(self):
        p = make_params(n=2, v=V0_2, c=np.ones(2))
        got = cell_matrix(p, [1.0, 0.0], 2.0)
        assert np.allclose(got, [[-1.0, 1.0], [1.0, -2.0]], atol=0)

    def test_always_symmetric(self):
        rng = np.random.default_rng(21)
        v = rng.standard_normal((3, 3))
        p = make_params(n=3, v=v + v.T, c=rng.uniform(0.5, 2.0, 3))
        for _ in range(100):
            omega = sample_cell(p, rng)
            m = cell_matrix(p, omega, rng.uniform(-3, 3))
            assert np.array_equal(m, m.T)


class TestGenerator:
    def test_order_one_block_layout(self):
        p = make_params()
        x = generator(p, [0.0], 0.0)
        assert np.allclose(x.matrix, [[0.0, 1.0], [0.0, 0.0]], atol=0)

    def test_block_structure(self):
        p = make_params(n=2, v=V0_2, c=np.ones(2))
        x = generator(p, [1.0, 1.0], 0.3)
        assert np.all(x.a == 0.0)
        assert np.array_equal(x.b, np.eye(2))
        assert is_hamiltonian(x.matrix, 0.0)


class TestTransfer:
    def test_small_cell_near_identity(self):
        p = make_params(ell=1e-4)
        x = generator(p, [1.0], 0.0)
        t = transfer(p, [1.0], 0.0)
        assert np.linalg.norm(t - np.eye(2)) <= 2 * p.ell * np.linalg.norm(x.matrix, 2)

    def test_hyperbolic_closed_form(self):
        # one channel, cell matrix m > 0: blocks cosh, sinh/sqrt(m), sqrt(m)*sinh
        p = make_params(v=np.array([[1.0]]), ell=1.0, disorder=DisorderSpec.point(0.0))
        t = transfer(p, [0.0], 0.0)
        want = [[math.cosh(1), math.sinh(1)], [math.sinh(1), math.cosh(1)]]
        assert np.allclose(t, want, rtol=1e-12)

    def test_oscillatory_closed_form(self):
        k, ell = 1.7, 0.4
        p = make_params(ell=ell)
        t = transfer(p, [0.0], k * k)
        want = [
            [math.cos(k * ell), math.sin(k * ell) / k],
            [-k * math.sin(k * ell), math.cos(k * ell)],
        ]
        assert np.allclose(t, want, rtol=1e-12, atol=1e-14)

    def test_symplectic_for_random_inputs(self):
        rng = np.random.default_rng(22)
        for _ in range(50):
            n = int(rng.integers(1, 4))
            v = rng.standard_normal((n, n))
            p = make_params(n=n, v=v + v.T, c=rng.uniform(0.5, 2.0, n), ell=rng.uniform(0.05, 1.0))
            t = transfer(p, rng.integers(0, 2, n).astype(float), rng.uniform(-3, 3))
            assert is_symplectic(t, 1e-10 * np.linalg.norm(t) ** 2)


class TestGeneratorNorm:
    def test_unit_floor(self):
        p = make_params(v=np.array([[0.3]]))
        assert generator_norm(p, [0.0], 0.5) == 1.0

    def test_single_channel_value(self):
        p = make_params()
        assert generator_norm(p, [1.0], 0.0) == 1.0
        assert generator_norm(p, [1.0], -2.0) == 3.0

    def test_against_svd_oracle(self):
        rng = np.random.default_rng(23)
        for _ in range(200):
            n = int(rng.integers(1, 5))
            v = rng.standard_normal((n, n))
            p = make_params(n=n, v=v + v.T, c=rng.uniform(0.5, 2.0, n))
            omega = rng.integers(0, 2, n).astype(float)
            e = rng.uniform(-4, 4)
            x = generator(p, omega, e).matrix
            oracle = np.linalg.svd(x, compute_uv=False)[0]
            assert abs(generator_norm(p, omega, e) - oracle) <= 1e-10 * max(1.0, oracle)


class TestSpectralBounds:
    def test_single_channel(self):
        b = spectral_bounds(make_params())
        assert (b.lambda_min, b.lambda_max, b.delta) == (0.0, 1.0, 0.5)
        assert b.ell_c == min(1.0, DEFAULT_RHO / 0.5)

    def test_two_channel_tridiagonal(self):
        b = spectral_bounds(make_params(n=2, v=V0_2, c=np.ones(2)))
        assert abs(b.lambda_min + 1.0) <= 1e-12
        assert abs(b.lambda_max - 2.0) <= 1e-12
        assert abs(b.delta - 1.5) <= 1e-12

    def test_scalar_shift_structure(self):
        lam = -0.7
        p = make_params(n=3, v=lam * np.eye(3), c=np.ones(3))
        b = spectral_bounds(p)
        assert abs(b.lambda_min - lam) <= 1e-12
        assert abs(b.lambda_max - (lam + 1.0)) <= 1e-12
        assert abs(b.delta - 0.5) <= 1e-12

    def test_channel_relabeling_invariance(self):
        rng = np.random.default_rng(24)
        v = rng.standard_normal((3, 3))
        v = v + v.T
        c = np.array([0.5, 1.0, 2.0])
        perm = np.array([2, 0, 1])
        pmat = np.eye(3)[perm]
        p1 = make_params(n=3, v=v, c=c)
        p2 = make_params(n=3, v=pmat @ v @ pmat.T, c=c[perm])
        b1, b2 = spectral_bounds(p1), spectral_bounds(p2)
        assert abs(b1.lambda_min - b2.lambda_min) <= 1e-12
        assert abs(b1.lambda_max - b2.lambda_max) <= 1e-12


class TestEnergyInterval:
    def test_plugged_values(self):
        p = make_params(rho=0.69)
        window = energy_interval(p)
        assert abs(window.lo - (1.0 - 6.9)) <= 1e-12
        assert abs(window.hi - 6.9) <= 1e-12

    def test_empty_iff_ell_at_least_ell_c(self):
        # delta = 1 here, so ell_c = rho < 1
        for ell, expect_empty in ((0.69, False), (0.6932, True), (1.2, True)):
            p = make_params(c=np.array([2.0]), ell=ell)
            assert energy_interval(p).is_empty == expect_empty
            assert (ell < spectral_bounds(p).ell_c) == (not expect_empty)

    def test_length_formula(self):
        p = make_params(c=np.array([2.0]), ell=0.3)
        b = spectral_bounds(p)
        window = energy_interval(p)
        assert abs(window.length - 2 * (p.rho / p.ell - b.delta)) <= 1e-12

    def test_length_grows_without_bound(self):
        lengths = [energy_interval(make_params(ell=ell)).length for ell in (0.1, 0.01, 0.001)]
        assert lengths[0] < lengths[1] < lengths[2]
        assert lengths[2] > 1000

    def test_norm_condition_inside_window(self):
        # with ell <= rho, every binary cell satisfies ell * norm <= rho on the window
        rng = np.random.default_rng(25)
        for _ in range(20):
            n = int(rng.integers(1, 4))
            v = rng.standard_normal((n, n))
            rho = rng.uniform(0.3, 1.0)
            ell = rng.uniform(0.05, rho)
            p = make_params(n=n, v=v + v.T, c=rng.uniform(0.5, 2.0, n), ell=ell, rho=rho)
            window = energy_interval(p)
            if window.is_empty:
                continue
            for e in np.linspace(window.lo, window.hi, 7):
                for omega in binary_cells(n):
                    assert p.ell * generator_norm(p, omega, e) <= p.rho + 1e-12


class TestSampling:
    def test_degenerate_law_is_constant(self):
        p = make_params(disorder=DisorderSpec(((1.0, 1.0),)))
        rng = stream(0)
        for _ in range(10):
            assert np.all(sample_cell(p, rng) == 1.0)

    def test_bernoulli_mean(self):
        p = make_params()
        rng = stream(42)
        draws = sample_path(p, 100_000, rng)
        assert abs(draws.mean() - 0.5) <= 0.01

    def test_fixed_seed_reproduces(self):
        p = make_params(n=2, v=V0_2, c=np.ones(2))
        a = sample_path(p, 50, stream(7))
        b = sample_path(p, 50, stream(7))
        assert np.array_equal(a, b)


class TestBinaryCells:
    def test_order_one(self):
        assert np.array_equal(binary_cells(1), [[0.0], [1.0]])

    def test_lexicographic_order_two(self):
        assert np.array_equal(binary_cells(2), [[0, 0], [0, 1], [1, 0], [1, 1]])

    def test_cardinality(self):
        assert binary_cells(4).shape == (16, 4)

    def test_size_guard(self):
        with pytest.raises(SizeGuardError):
            binary_cells(21)


class TestEnergyIntervalType:
    def test_empty_representation(self):
        e = EnergyInterval.empty()
        assert e.is_empty
        assert e.length == 0.0
        assert not e.contains(0.0)

    def test_contains(self):
        e = EnergyInterval(-1.0, 2.0)
        assert e.contains(-1.0) and e.contains(2.0) and e.contains(0.5)
        assert not e.contains(2.1)
