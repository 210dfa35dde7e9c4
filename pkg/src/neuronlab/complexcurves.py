"""Complex evaluation of sigmoid neurons: pole lattices, blow-up curves, and
decay profiles along them.

A sigmoid neuron sigma(w z + b) is meromorphic with simple poles on the
lattice (i(2q+1)pi - b)/w.  A blow-up curve approaches one neuron's pole
along a path where that neuron stays real and divergent while all
later-indexed neurons remain analytic and bounded on a residual disk.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .expr import sigmoid_complex
from .growth import Curve

POLE_GUARD_DIST = 1e-8
BYSTANDER_BOUND = 1e6


class ComplexCurveError(ValueError):
    pass


def sigmoid_pole(w: float, b: float, q: int) -> complex:
    """Pole of sigma(w z + b): (i(2q+1)pi - b) / w."""
    if w == 0.0:
        raise ComplexCurveError("w must be nonzero")
    return (1j * (2 * q + 1) * math.pi - b) / w


@dataclass(frozen=True)
class PoleLattice:
    w: float
    b: float

    def pole(self, q: int) -> complex:
        return sigmoid_pole(self.w, self.b, q)

    def nearest_distance(self, z: complex, q_range: int = 64) -> float:
        # the nearest lattice index solves Im(w z) ~ (2q+1)pi
        q0 = round((self.w * z).imag / (2 * math.pi) - 0.5)
        return min(abs(z - self.pole(q)) for q in range(q0 - q_range, q0 + q_range + 1))


def neuron_value(w: float, b: float, z: complex) -> complex:
    return sigmoid_complex(w * z + b)


@dataclass
class BlowupCurve:
    curve: Curve
    pole: complex
    shift: float
    index: int
    sign: int
    params: list
    disk_radius: float
    mixed_sign_extension: bool = False  # negative weights: beyond the stated lemma

    def target_values(self, ts) -> np.ndarray:
        w, b = self.params[self.index]
        return np.array([neuron_value(w, b, self.curve.map(float(t))) for t in ts])


def _disk_samples(center: complex, radius: float, rings: int = 4, per_ring: int = 24):
    pts = [center]
    for r in np.linspace(radius / rings, radius, rings):
        for ang in np.linspace(0.0, 2 * math.pi, per_ring, endpoint=False):
            pts.append(center + r * cmath.exp(1j * ang))
    return pts


def blowup_curve(params: Sequence[tuple], k: int, sign: int = +1, tmax: float = 200.0) -> BlowupCurve:
    """Curve approaching the principal pole of neuron k from the given side.

    gamma(t) = (1/w_k)(sign/(t+1+T) - b_k + i pi); the shift T doubles until
    every later-indexed neuron stays bounded by 1e6 on the residual disk, so
    the target neuron is real and divergent while the bystanders are analytic
    there.  Requires pairwise-distinct (w, b) sorted by non-increasing |w|;
    negative weights reuse the same construction through the matching
    lower-half-plane pole and are flagged as an extension of the stated
    all-positive case.
    """
    params = [(float(w), float(b)) for w, b in params]
    m = len(params)
    if not (0 <= k < m):
        raise ComplexCurveError(f"neuron index {k} out of range")
    ws = [w for w, _ in params]
    if any(w == 0 for w in ws):
        raise ComplexCurveError("weights must be nonzero")
    if any(abs(ws[i]) < abs(ws[i + 1]) for i in range(m - 1)):
        raise ComplexCurveError("parameters must be sorted by non-increasing |weight|")
    mixed = any(w < 0 for w in ws)
    for i in range(m):
        for j in range(i + 1, m):
            if params[i] == params[j]:
                raise ComplexCurveError(f"parameters {i} and {j} coincide")
    if sign not in (+1, -1):
        raise ComplexCurveError("sign must be +-1")
    w_k, b_k = params[k]
    pole = sigmoid_pole(w_k, b_k, 0)

    def bounded_on_disk(radius: float) -> bool:
        for j in range(k + 1, m):
            w_j, b_j = params[j]
            for z in _disk_samples(pole, radius):
                if PoleLattice(w_j, b_j).nearest_distance(z) < POLE_GUARD_DIST:
                    return False
                if abs(neuron_value(w_j, b_j, z)) > BYSTANDER_BOUND:
                    return False
        return True

    shift = 0.0
    for _ in range(60):
        radius = 1.0 / (abs(w_k) * (1.0 + shift))
        if bounded_on_disk(radius):
            break
        shift = 1.0 if shift == 0.0 else 2.0 * shift
    else:
        raise ComplexCurveError("no shift bounds the bystanders; parameters degenerate?")

    def gamma(t: float) -> complex:
        return (sign / (t + 1.0 + shift) - b_k + 1j * math.pi) / w_k

    def dgamma(t: float) -> complex:
        return complex(-sign / (w_k * (t + 1.0 + shift) ** 2))

    curve = Curve(map=gamma, dmap=dgamma, t0=0.0, tmax=tmax)
    return BlowupCurve(curve, pole, shift, k, sign, params,
                       1.0 / (abs(w_k) * (1.0 + shift)), mixed_sign_extension=mixed)


@dataclass
class DecayProfile:
    ts: np.ndarray
    log_abs: np.ndarray          # shape (len(fns), len(ts))
    flags: list = field(default_factory=list)  # (t, fn_index, "near-pole")

    def rows(self):
        for j, t in enumerate(self.ts):
            yield (float(t), *[float(v) for v in self.log_abs[:, j]])


def curve_decay_profile(
    fns: Sequence[Callable[[complex], complex]],
    curve: Curve,
    ts: Sequence[float],
    pole_guards: Optional[Sequence[PoleLattice]] = None,
) -> DecayProfile:
    """Table of log|f_i(gamma(t))| along the curve.

    If a guard lattice comes within 1e-8 of the evaluation point the row is
    flagged: the curve shift was too small for that bystander.
    """
    ts = np.asarray(ts, dtype=float)
    out = np.empty((len(fns), len(ts)))
    flags = []
    for j, t in enumerate(ts):
        z = curve.map(float(t))
        if pole_guards:
            for gi, guard in enumerate(pole_guards):
                if guard.nearest_distance(z) < POLE_GUARD_DIST:
                    flags.append((float(t), gi, "near-pole"))
        for i, f in enumerate(fns):
            v = f(z)
            av = abs(v)
            out[i, j] = math.log(av) if av > 0 else -math.inf
    return DecayProfile(ts, out, flags)


def three_layer_sigmoid_neuron(w2_row: Sequence[float], b2: float, first_layer: Sequence[tuple]):
    """H(z) = sigma(sum_k w2_k sigma(w_k z + b_k) + b2) as a complex-stable callable."""
    w2_row = [float(v) for v in w2_row]
    first_layer = [(float(w), float(b)) for w, b in first_layer]

    def call(z: complex) -> complex:
        acc = complex(b2)
        for c, (w, b) in zip(w2_row, first_layer):
            acc += c * sigmoid_complex(w * z + b)
        return sigmoid_complex(acc)

    return call
