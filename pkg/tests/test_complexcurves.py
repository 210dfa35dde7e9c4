"""Pole lattices, blow-up curves, and decay profiles for sigmoid neurons."""

import cmath
import math

import numpy as np
import pytest

from neuronlab.complexcurves import (
    BlowupCurve,
    ComplexCurveError,
    PoleLattice,
    blowup_curve,
    curve_decay_profile,
    neuron_value,
    sigmoid_pole,
    three_layer_sigmoid_neuron,
)
from neuronlab.expr import sigmoid_complex
from neuronlab.indep import numeric_independent


class TestPoles:
    def test_principal_pole(self):
        assert sigmoid_pole(1.0, 0.0, 0) == pytest.approx(1j * math.pi)

    def test_weight_scaling(self):
        assert sigmoid_pole(2.0, 0.0, 0) == pytest.approx(1j * math.pi / 2)

    def test_bias_shift(self):
        assert sigmoid_pole(1.0, 1.0, 0) == pytest.approx(-1.0 + 1j * math.pi)

    def test_zero_weight_rejected(self):
        with pytest.raises(ComplexCurveError):
            sigmoid_pole(0.0, 1.0, 0)

    @pytest.mark.parametrize("w,b", [(1.0, 0.0), (2.0, -0.7), (0.6, 1.3)])
    def test_simple_pole_growth(self, w, b):
        # |sigma(w z + b)| ~ 1/(w |delta|) approaching the pole
        pole = sigmoid_pole(w, b, 0)
        for delta in (1e-3, 1e-4, 1e-5, 1e-6):
            v = abs(neuron_value(w, b, pole + delta))
            assert v * delta * w == pytest.approx(1.0, rel=1e-2)

    def test_nearest_distance(self):
        lat = PoleLattice(1.0, 0.0)
        assert lat.nearest_distance(1j * math.pi + 0.01) == pytest.approx(0.01, rel=1e-9)
        assert lat.nearest_distance(3j * math.pi) == pytest.approx(0.0, abs=1e-12)


class TestBlowupCurve:
    def test_single_neuron_closed_form(self):
        bc = blowup_curve([(1.0, 0.0)], 0, +1)
        assert bc.shift == 0.0
        ts = np.linspace(0.0, 50.0, 100)
        vals = bc.target_values(ts)
        expected = 1.0 / (1.0 - np.exp(-1.0 / (ts + 1.0)))
        assert np.max(np.abs(vals.real - expected)) < 1e-12
        assert np.max(np.abs(vals.imag)) < 1e-12

    def test_value_at_zero(self):
        bc = blowup_curve([(1.0, 0.0)], 0, +1)
        v = bc.target_values([0.0])[0]
        assert v.real == pytest.approx(1.0 / (1.0 - math.exp(-1.0)), abs=1e-6)
        assert v.real == pytest.approx(1.581977, abs=1e-6)

    def test_negative_side_diverges_down(self):
        bc = blowup_curve([(1.0, 0.0)], 0, -1)
        vals = bc.target_values(np.linspace(0, 50, 25))
        assert np.all(vals.real < 0)
        assert np.all(np.diff(vals.real) < 0)
        assert vals.real[-1] < -10.0

    def test_divergence_monotone(self):
        bc = blowup_curve([(1.5, 0.3)], 0, +1)
        vals = bc.target_values(np.linspace(0, 80, 40)).real
        assert np.all(np.diff(vals) > 0)

    def test_bystanders_bounded(self):
        params = [(2.0, 0.0), (1.0, 0.5), (0.7, -0.3)]
        bc = blowup_curve(params, 0, +1)
        ts = np.linspace(0, 60, 30)
        for j in (1, 2):
            w, b = params[j]
            vals = [abs(neuron_value(w, b, bc.curve.map(float(t)))) for t in ts]
            assert max(vals) < 1e6

    def test_unsorted_rejected(self):
        with pytest.raises(ComplexCurveError):
            blowup_curve([(1.0, 0.0), (2.0, 0.0)], 0)

    def test_negative_weight_extension(self):
        # the same construction through the lower-half-plane pole; the result
        # carries the extension flag
        bc = blowup_curve([(-1.0, 0.0)], 0, +1)
        assert bc.mixed_sign_extension
        assert bc.pole == pytest.approx(-1j * math.pi)
        ts = np.linspace(0, 50, 25)
        vals = bc.target_values(ts)
        assert np.max(np.abs(vals.imag)) < 1e-12
        assert np.all(np.diff(vals.real) > 0) and vals.real[-1] > 10.0
        # positive-weight curves stay unflagged
        assert not blowup_curve([(1.0, 0.0)], 0, +1).mixed_sign_extension

    def test_mixed_sign_family_bystanders(self):
        params = [(1.5, 0.2), (-1.0, 0.4), (0.6, -0.1)]
        bc = blowup_curve(params, 0, +1)
        assert bc.mixed_sign_extension
        ts = np.linspace(0, 40, 20)
        for j in (1, 2):
            w, b = params[j]
            assert max(abs(neuron_value(w, b, bc.curve.map(float(t)))) for t in ts) < 1e6

    def test_duplicates_rejected(self):
        with pytest.raises(ComplexCurveError):
            blowup_curve([(1.0, 0.0), (1.0, 0.0)], 0)

    def test_shared_pole_forces_shift(self):
        # neuron 1 (w=3, b=0) has a pole at i*pi = neuron 0's principal pole
        params = [(3.0, 0.0), (1.0, 0.0)]
        bc = blowup_curve(params, 1, +1)
        # wait: index 1 has w=1; bystanders are indices > 1 (none)
        assert bc.shift == 0.0
        # approaching the w=3 neuron's pole instead: bystander w=1 is fine
        bc0 = blowup_curve(params, 0, +1)
        w, b = params[1]
        ts = np.linspace(0, 40, 20)
        assert max(abs(neuron_value(w, b, bc0.curve.map(float(t)))) for t in ts) < 1e6


class TestDecayProfile:
    def test_target_neuron_blows_up(self):
        bc = blowup_curve([(1.0, 0.0)], 0, +1)
        ts = np.linspace(0, 60, 30)
        prof = curve_decay_profile([lambda z: sigmoid_complex(z)], bc.curve, ts)
        assert np.all(np.diff(prof.log_abs[0]) > 0)

    def test_near_pole_flags(self):
        bc = blowup_curve([(1.0, 0.0)], 0, +1, tmax=1e9)
        guard = PoleLattice(1.0, 0.0)  # the target's own lattice
        ts = [1e9]  # gamma is within 1/(t+1) of the pole: closer than 1e-8
        prof = curve_decay_profile([lambda z: z], bc.curve, ts, pole_guards=[guard])
        assert prof.flags and prof.flags[0][2] == "near-pole"

    def test_cancelling_block_decays_faster(self):
        # block sum_{j} a_j / (1 + lambda_j(z) e^{w f1(z)}) on f1's blow-up curve;
        # a real coefficient can cancel the leading term only if the lambda
        # ratio is real at the pole, so the exponents are phase-aligned
        w1, b1 = 1.0, 0.0
        w2, b2 = 0.4, 0.2
        bc = blowup_curve([(w1, b1), (w2, b2)], 0, +1)
        zstar = bc.pole
        f1 = lambda z: sigmoid_complex(w1 * z + b1)
        f2 = lambda z: sigmoid_complex(w2 * z + b2)
        c1 = 0.3
        c2 = c1 + 2.0 * math.pi / f2(zstar).imag
        lam1 = lambda z: cmath.exp(c1 * f2(z))
        lam2 = lambda z: cmath.exp(c2 * f2(z))
        ratio = lam2(zstar) / lam1(zstar)
        assert abs(ratio.imag) < 1e-9 * abs(ratio)
        w = 1.3
        a1 = 1.0
        a2_cancel = -a1 * ratio.real  # kills the leading coefficient at z*
        a2_plain = a1

        def block(a2):
            return lambda z: a1 / (1 + lam1(z) * cmath.exp(w * f1(z))) + a2 / (
                1 + lam2(z) * cmath.exp(w * f1(z)))

        ts = np.linspace(5.0, 120.0, 24)
        fvals = np.array([f1(bc.curve.map(float(t))).real for t in ts])
        prof = curve_decay_profile([block(a2_cancel), block(a2_plain)], bc.curve, ts)
        # non-cancelling block: log|g| ~ -w f + const; slope within 5%
        slope_plain = np.polyfit(fvals, prof.log_abs[1], 1)[0]
        assert slope_plain == pytest.approx(-w, rel=0.05)
        # cancelling block: |g| e^{w f} keeps decaying (an extra algebraic
        # factor ~1/t), while the plain block's stays flat
        resid_cancel = prof.log_abs[0] + w * fvals
        resid_plain = prof.log_abs[1] + w * fvals
        assert np.all(np.diff(resid_cancel) < 0)
        assert resid_cancel[-1] < resid_cancel[0] - 2.0
        assert abs(resid_plain[-1] - resid_plain[0]) < 0.1


class TestThreeLayerConsistency:
    def test_hypotheses_imply_independence(self):
        rng = np.random.default_rng(31)
        for _ in range(100):
            m, n = 2, 2
            while True:
                W1 = rng.uniform(0.4, 1.6, m) * rng.choice([-1.0, 1.0], m)
                B1 = rng.uniform(-1.0, 1.0, m)
                P = np.column_stack([W1, B1])
                if all(np.max(np.abs(P[i] - P[j])) > 0.2 and np.max(np.abs(P[i] + P[j])) > 0.2
                       for i in range(m) for j in range(i + 1, m)):
                    break
            while True:
                W2 = rng.uniform(0.4, 1.6, (n, m)) * rng.choice([-1.0, 1.0], (n, m))
                B2 = rng.uniform(-1.0, 1.0, n)
                Q = np.column_stack([W2, B2])
                if all(np.max(np.abs(Q[i] - Q[j])) > 0.2 and np.max(np.abs(Q[i] + Q[j])) > 0.2
                       for i in range(n) for j in range(i + 1, n)):
                    break
            neurons = [three_layer_sigmoid_neuron(W2[j], B2[j], list(zip(W1, B1))) for j in range(n)]
            fam = [lambda xs, f=f: np.array([f(complex(x)).real for x in xs]) for f in neurons]
            out = numeric_independent(fam, tol=1e-8)
            assert out.independent, (W1, B1, W2, B2)
