"""Numeric independence oracle and dimension reduction."""

import math

import numpy as np
import pytest

from neuronlab import activations
from neuronlab.expr import X, compose, const, exp_, ipow, tanh_
from neuronlab.indep import IndepError, dimension_reduce, numeric_independent


class TestNumericIndependent:
    def test_tanh_dilates(self):
        out = numeric_independent([tanh_(X), compose(tanh_(X), 2.0 * X)])
        assert out.independent and out.min_singular_value > 1e-8

    def test_exact_collinearity(self):
        out = numeric_independent([tanh_(X), -1.0 * tanh_(X)])
        assert not out.independent
        assert out.min_singular_value < 1e-14

    def test_single_constant(self):
        out = numeric_independent([const(1.0)])
        assert out.independent

    def test_zero_function_certificate(self):
        out = numeric_independent([tanh_(X), const(0.0)])
        assert not out.independent
        assert out.certificate == ("zero-function", 1)

    def test_vandermonde_family(self):
        fams = [ipow(X, k) if k else const(1.0) for k in range(9)]
        out = numeric_independent(fams, interval=(-1.0, 1.0))
        assert out.independent and out.min_singular_value > 1e-8

    def test_exact_linear_combination(self):
        f, g = tanh_(X), activations.GAUSSIAN
        h = 0.5 * f + (-2.0) * g
        out = numeric_independent([f, g, h])
        assert not out.independent

    def test_scale_invariance_via_log_domain(self):
        # multiply one member by e^{+-69} (~1e30); verdict must not change
        base = [tanh_(X), compose(tanh_(X), 2.0 * X)]
        scaled = [const(math.exp(69.0)) * base[0], const(math.exp(-69.0)) * base[1]]
        a, b = numeric_independent(base), numeric_independent(scaled)
        assert a.independent == b.independent
        assert a.min_singular_value == pytest.approx(b.min_singular_value, rel=1e-6)

    def test_exp_tower_magnitudes(self):
        # e^{200 x^2} overflows doubles on [-2,2]; its product with x is odd,
        # so after the log-domain rescale the pair is cleanly orthogonal
        big = exp_(200.0 * ipow(X, 2))
        fam = [big, X * big]
        out = numeric_independent(fam, interval=(-2.0, 2.0))
        assert out.independent and out.min_singular_value > 0.9

    def test_ordered_growth_families_are_independent(self):
        # a family the growth module orders along a curve inside the sample
        # interval must come back independent from the oracle
        from neuronlab.growth import Curve, order_by_growth

        fam = [exp_(2.0 * X), exp_(X), X]
        assert order_by_growth(fam, Curve.real_line(), tmax=40.0) == [0, 1, 2]
        out = numeric_independent(fam, interval=(0.0, 4.0))
        assert out.independent


class TestDimensionReduce:
    def test_projections_distinct(self):
        v = dimension_reduce([[1.0, 0.0], [0.0, 1.0]], seed=3)
        p = np.array([[1.0, 0.0], [0.0, 1.0]]) @ v
        assert abs(p[0] - p[1]) > 0.25 / (4 * math.sqrt(2))

    def test_multiples_preserved(self):
        w1 = np.array([0.3, -1.2, 0.7])
        W = np.stack([w1, 3.0 * w1])
        v = dimension_reduce(W, seed=0)
        p = W @ v
        assert p[1] == pytest.approx(3.0 * p[0], rel=1e-12)

    def test_duplicate_weights_error(self):
        with pytest.raises(IndepError):
            dimension_reduce([[1.0, 2.0], [1.0, 2.0]])

    def test_separation_bound_random_sets(self):
        rng = np.random.default_rng(7)
        for trial in range(50):
            d = int(rng.integers(2, 6))
            m = int(rng.integers(2, 5))
            W = rng.standard_normal((m, d))
            v = dimension_reduce(W, attempts=10, seed=trial)
            assert np.linalg.norm(v) == pytest.approx(1.0, rel=1e-12)
            diffs = np.array([W[i] - W[j] for i in range(m) for j in range(i + 1, m)])
            delta = np.min(np.linalg.norm(diffs, axis=1)) / (4 * math.sqrt(d))
            assert np.min(np.abs(diffs @ v)) > delta
