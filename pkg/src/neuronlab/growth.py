"""Curves, arclength, sampled growth classification, and neuron order predictors.

Growth verdicts are empirical at ladder resolution: they sample log-magnitudes
along a documented t-ladder and report the observed ratio behaviour, not a
certified limit.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.integrate import quad

from .expr import EvalFlag, ScalarExpr, SignedLogValue, compose, const, differentiate, eval_complex, eval_log_domain, mul, add

EPS_RATIO = 1e-3
LOG_EPS_RATIO = math.log(EPS_RATIO)
TIE_BAND = 0.5           # log-ratio band treated as "bounded"
DIVERGE_MARGIN = 8.0     # nats of growth required across the ladder tail
WITNESS_POINTS = 8       # monotonicity witness length


class CurveError(ValueError):
    pass


@dataclass(frozen=True)
class Curve:
    """Parameterized path t -> gamma(t) in R or C on [t0, tmax]."""

    map: Callable[[float], complex]
    dmap: Optional[Callable[[float], complex]] = None
    t0: float = 0.0
    tmax: float = math.inf
    unit_speed: bool = False  # enables the exact arclength shortcut

    @staticmethod
    def real_line(t0: float = 0.0, tmax: float = math.inf) -> "Curve":
        return Curve(map=lambda t: t, dmap=lambda t: 1.0, t0=t0, tmax=tmax,
                     unit_speed=True)

    def speed(self, t: float) -> float:
        if self.dmap is not None:
            d = self.dmap(t)
        else:
            h = max(1e-6, 1e-9 * abs(t))
            d = (self.map(t + h) - self.map(t - h)) / (2 * h)
        v = abs(d)
        if not math.isfinite(v):
            raise CurveError(f"non-finite curve derivative at t={t}")
        return v


def arclength(curve: Curve, t: float, rel_tol: float = 1e-10) -> float:
    """l(t) = integral of |gamma'| from t0, by adaptive quadrature."""
    if t < curve.t0 - 1e-12 or (t > curve.tmax and not math.isinf(t)):
        raise CurveError(f"t={t} outside curve domain [{curve.t0}, {curve.tmax}]")
    if curve.unit_speed:
        return float(t - curve.t0)
    val, _ = quad(curve.speed, curve.t0, t, epsrel=rel_tol, limit=200)
    return float(val)


def inverse_arclength(curve: Curve, target: float, t_hint: float, t_cap: float) -> Optional[float]:
    """Smallest t with l(t) >= target, or None if not reached by t_cap."""
    if curve.unit_speed:
        t = curve.t0 + target
        return t if t <= t_cap else None
    lo, hi = t_hint, max(t_hint * 2, t_hint + 1.0)
    while arclength(curve, min(hi, t_cap)) < target:
        if hi >= t_cap:
            return None
        lo, hi = hi, min(hi * 2, t_cap)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if arclength(curve, mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-10 * max(1.0, abs(hi)):
            break
    return hi


@dataclass
class GrowthVerdict:
    cls: str  # hyper-exponential | hyper-polynomial-only | neither | divergence-not-detected
    evidence: list = field(default_factory=list)  # rows (t, l(t), gap, log-ratio)

    @property
    def hyper_exponential(self):
        return self.cls == "hyper-exponential"

    @property
    def hyper_polynomial(self):
        return self.cls in ("hyper-exponential", "hyper-polynomial-only")


LogEvaluable = Union[ScalarExpr, Callable[[float], float]]


def _log_along(f: LogEvaluable, curve: Curve, t: float) -> SignedLogValue:
    """Signed log of Re f(gamma(t))."""
    z = curve.map(t)
    if isinstance(f, ScalarExpr):
        if isinstance(z, complex) and z.imag != 0.0:
            return SignedLogValue.from_float(eval_complex(f, z).real)
        out = eval_log_domain(f, float(z.real) if isinstance(z, complex) else float(z))
        if isinstance(out, EvalFlag):
            raise CurveError(f"log-domain {out.kind} at t={t}: {out.detail}")
        return out
    v = f(t)
    if isinstance(v, SignedLogValue):
        return v
    return SignedLogValue.from_float(float(v))


def default_ladder(curve: Curve, points: int = 32, t_lo: float = 1.0, tmax: Optional[float] = None) -> np.ndarray:
    hi = tmax if tmax is not None else (curve.tmax if math.isfinite(curve.tmax) else 50.0)
    lo = max(t_lo, curve.t0 + 1e-9)
    if hi <= lo:
        raise CurveError("empty ladder")
    return np.geomspace(lo, hi, points)


def fit_tmax(fs: Sequence[LogEvaluable], curve: Curve, tmax0: float = 50.0, points: int = 32) -> float:
    """Shrink tmax until every f evaluates finitely (log-domain) on the ladder."""
    tmax = tmax0
    for _ in range(60):
        try:
            for t in default_ladder(curve, points, tmax=tmax):
                for f in fs:
                    out = _log_along(f, curve, float(t))
                    if math.isinf(out.log_abs) and out.log_abs > 0:
                        raise CurveError("log-magnitude beyond double range")
            return tmax
        except CurveError:
            tmax /= 1.5
    raise CurveError("could not fit a finite evaluation ladder")


def _monotone_decreasing(tail: Sequence[float]) -> bool:
    return all(tail[i + 1] < tail[i] for i in range(len(tail) - 1))


def classify_growth(
    f: LogEvaluable,
    curve: Curve,
    gaps: Sequence[float] = (1.0, 2.0, 4.0),
    points: int = 32,
    tmax: Optional[float] = None,
) -> GrowthVerdict:
    """Sampled hyper-exponential / hyper-polynomial classification along a curve.

    Hyper-exponential: for every fixed arclength gap b the log-ratio
    log|f(t)| - log|f(t')| (with l(t') = l(t) + b) decreases monotonically
    below log(eps_ratio) across the ladder tail.  Hyper-polynomial-only: the
    same happens only for a growing gap schedule.
    """
    if any(b <= 0 for b in gaps):
        raise CurveError("gaps must be strictly positive")
    ladder = default_ladder(curve, points, tmax=tmax)
    t_cap = float(ladder[-1]) * 4.0
    logs = [_log_along(f, curve, float(t)) for t in ladder]
    sign_ref = next((s.sign for s in logs if s.sign != 0), 0)
    evidence = [(float(t), arclength(curve, float(t)), s.sign, s.log_abs) for t, s in zip(ladder, logs)]

    mags = [s.log_abs if s.sign == sign_ref else -math.inf for s in logs]
    tail = mags[-WITNESS_POINTS:]
    diverging = (
        sign_ref != 0
        and all(math.isfinite(m) for m in tail)
        and all(tail[i + 1] > tail[i] for i in range(len(tail) - 1))
        and tail[-1] - mags[0] > DIVERGE_MARGIN
    )
    if not diverging:
        return GrowthVerdict("divergence-not-detected", evidence)

    def ratio_profile(gap_for):
        out = []
        for t in ladder:
            t = float(t)
            l_t = arclength(curve, t)
            b = gap_for(l_t)
            t2 = inverse_arclength(curve, l_t + b, t, t_cap)
            if t2 is None:
                continue
            a, c = _log_along(f, curve, t), _log_along(f, curve, t2)
            if a.sign != sign_ref or c.sign != sign_ref or c.is_zero():
                continue
            out.append((t, l_t, b, a.log_abs - c.log_abs))
        return out

    def vanishes(profile):
        if len(profile) < WITNESS_POINTS:
            return False
        ratios = [r for (_, _, _, r) in profile][-WITNESS_POINTS:]
        return _monotone_decreasing(ratios) and ratios[-1] < LOG_EPS_RATIO

    hyper_exp = True
    for b in gaps:
        profile = ratio_profile(lambda _l, b=b: b)
        evidence.extend(profile)
        if not vanishes(profile):
            hyper_exp = False
            break
    if hyper_exp:
        return GrowthVerdict("hyper-exponential", evidence)

    growing = ratio_profile(lambda l_t: 1.0 + l_t)
    evidence.extend(growing)
    if vanishes(growing):
        return GrowthVerdict("hyper-polynomial-only", evidence)
    return GrowthVerdict("neither", evidence)


# -- empirical ordering -------------------------------------------------------

@dataclass
class OrderFailure:
    pair: tuple[int, int]
    reason: str

    def __bool__(self):
        return False


def _mp_eval(e: ScalarExpr, x):
    """Arbitrary-precision evaluation (mpmath); exponents are unbounded."""
    import mpmath as mp

    k = e.kind
    if k == "const":
        return mp.mpf(e.param)
    if k == "var":
        return x
    if k == "compose":
        return _mp_eval(e.args[0], _mp_eval(e.args[1], x))
    if k == "neg":
        return -_mp_eval(e.args[0], x)
    if k == "exp":
        return mp.exp(_mp_eval(e.args[0], x))
    if k == "log":
        v = _mp_eval(e.args[0], x)
        if v <= 0:
            raise CurveError("log of non-positive value")
        return mp.log(v)
    if k == "tanh":
        return mp.tanh(_mp_eval(e.args[0], x))
    if k == "sigmoid":
        v = _mp_eval(e.args[0], x)
        return 1 / (1 + mp.exp(-v))
    if k == "ipow":
        return _mp_eval(e.args[0], x) ** e.param
    if k == "rpow":
        v = _mp_eval(e.args[0], x)
        if v < 0:
            raise CurveError("real power of negative base")
        return v ** mp.mpf(e.param)
    a = _mp_eval(e.args[0], x)
    b = _mp_eval(e.args[1], x)
    if k == "add":
        return a + b
    if k == "sub":
        return a - b
    if k == "mul":
        return a * b
    if k == "div":
        return a / b
    raise CurveError(f"unknown kind {k}")


def _mp_log_abs(e: ScalarExpr, t: float):
    import mpmath as mp

    v = _mp_eval(e, mp.mpf(t))
    if v == 0:
        return mp.mpf("-inf")
    return mp.log(abs(v))


def growth_evidence(fs: Sequence[LogEvaluable], curve: Curve, ladder: Sequence[float]):
    """Rows (t, l(t), log|f_0(gamma(t))|, log|f_1(...)|, ...) for CSV export."""
    rows = []
    for t in ladder:
        t = float(t)
        mags = [_log_along(f, curve, t).log_abs for f in fs]
        rows.append((t, arclength(curve, t), *mags))
    return rows


def order_by_growth(
    fs: Sequence[LogEvaluable],
    curve: Curve,
    ladder: Optional[Sequence[float]] = None,
    points: int = 32,
    tmax: Optional[float] = None,
    dps: int = 40,
) -> Union[list[int], OrderFailure]:
    """Permutation (dominant first) with f_pi(k) = o(f_pi(k-1)) empirically.

    Returns an OrderFailure naming the first non-separating pair when two
    functions' log-magnitude difference stays bounded on the ladder tail.

    Expression inputs on real curves are evaluated in `dps`-digit arithmetic:
    an additive separation like log(t) between exp-tower magnitudes ~1e25 is
    real but falls below float64 resolution.
    """
    import mpmath as mp

    if len(fs) < 2:
        raise CurveError("need at least two functions")
    exact = all(isinstance(f, ScalarExpr) for f in fs) and not isinstance(curve.map(curve.t0 + 1.0), complex)
    if ladder is None:
        if tmax is None:
            tmax = fit_tmax(fs, curve) if not exact else 50.0
        ladder = default_ladder(curve, points, tmax=tmax)

    if exact:
        with mp.workdps(dps):
            mags = [[_mp_log_abs(f, float(t)) for t in ladder] for f in fs]
            # the log-magnitudes themselves can be astronomically large; the
            # working precision must leave ~25 digits past their integer part
            peak = max((abs(m) for row in mags for m in row if mp.isfinite(m)), default=mp.mpf(1))
            need = (int(mp.log10(peak)) if peak > 1 else 0) + 25
        if need > dps:
            with mp.workdps(need):
                mags = [[_mp_log_abs(f, float(t)) for t in ladder] for f in fs]
    else:
        mags = [[_log_along(f, curve, float(t)).log_abs for t in ladder] for f in fs]

    def tail_diff(i, k):
        out = []
        for j in range(len(ladder) - WITNESS_POINTS, len(ladder)):
            a, b = mags[i][j], mags[k][j]
            if not (math.isfinite(a) and math.isfinite(b)) and not exact:
                return None
            d = a - b
            if exact and not mp.isfinite(d):
                return None
            out.append(float(d))
        return out

    def dominance(i, k):
        """+1 if f_i >> f_k, -1 if f_k >> f_i, 0 if tied/unclear."""
        d = tail_diff(i, k)
        if d is None:
            return 0
        if max(d) - min(d) < TIE_BAND:
            return 0
        inc = all(d[j + 1] > d[j] for j in range(len(d) - 1))
        dec = all(d[j + 1] < d[j] for j in range(len(d) - 1))
        if inc and d[-1] > DIVERGE_MARGIN:
            return 1
        if dec and -d[-1] > DIVERGE_MARGIN:
            return -1
        return 0

    n = len(fs)
    for i in range(n):
        for k in range(i + 1, n):
            if dominance(i, k) == 0:
                return OrderFailure((i, k), "log-ratio bounded or non-monotone on ladder")
    order = sorted(range(n), key=lambda i: mags[i][-1], reverse=True)
    for a, b in zip(order, order[1:]):
        if dominance(a, b) != 1:
            return OrderFailure((a, b), "pairwise dominance inconsistent with sort")
    return order


# -- combinatorial predictors (ordered-growth propositions) -------------------

@dataclass
class NotOrdered:
    certificate: tuple
    reason: str

    def __bool__(self):
        return False


NeuronKey = tuple  # ("H", j) | ("dH_b", j) | ("dH_w", j, k)


def predict_neuron_order(
    weights,
    biases=None,
    variant: str = "I",
    inner_order: Optional[Sequence[int]] = None,
    orientation: str = "positive",
) -> Union[list[NeuronKey], NotOrdered]:
    """Total growth order of neurons H_j = sigma(sum_k w_jk f_k + b_j).

    The comparison rule follows the ordered-growth propositions: find the
    first inner index where two parameter rows differ; the shared leading
    sign times the leading difference decides.  Equal rows order by bias with
    the same sign convention.  Variant III appends the parameter-derivative
    neurons of each H_j as a nested block.  `orientation` fixes which of the
    two admissible sign conventions ("positive" or "negative" side dominates)
    the activation satisfies.
    """
    W = np.atleast_2d(np.asarray(weights, dtype=float))
    n, m = W.shape
    if inner_order is not None:
        W = W[:, list(inner_order)]
    if variant not in ("I", "II", "III"):
        raise ValueError(f"unknown variant {variant!r}")
    if variant == "I":
        b = np.zeros(n)
    else:
        if biases is None:
            raise ValueError(f"variant {variant} requires biases")
        b = np.asarray(biases, dtype=float)
    flip = -1.0 if orientation == "negative" else 1.0

    rows = [tuple(W[j]) + ((b[j],) if variant != "I" else ()) for j in range(n)]
    for j1 in range(n):
        for j2 in range(j1 + 1, n):
            if rows[j1] == rows[j2]:
                return NotOrdered(("duplicate-pair", (j1, j2)), "identical parameter rows")
    zero_rows = [j for j in range(n) if not W[j].any()]
    if zero_rows:
        return NotOrdered(("zero-weight", zero_rows[0]), "neuron with zero weight row is constant")

    def lead(j):
        k = int(np.argmax(W[j] != 0.0))
        return k, math.copysign(1.0, W[j, k])

    def beats(j1, j2):
        _, s1 = lead(j1)
        _, s2 = lead(j2)
        if s1 != s2:
            return (s1 > 0) if flip > 0 else (s1 < 0)
        diff = W[j1] - W[j2]
        nz = np.nonzero(diff)[0]
        if nz.size:
            return s1 * diff[nz[0]] > 0
        return s1 * (b[j1] - b[j2]) > 0

    neuron_order = sorted(range(n), key=functools.cmp_to_key(lambda a, c: -1 if beats(a, c) else 1))
    if variant in ("I", "II"):
        return [("H", j) for j in neuron_order]
    # variant III: nested blocks, most-dominant inner column first
    cols = list(inner_order) if inner_order is not None else list(range(m))
    out: list[NeuronKey] = []
    for j in neuron_order:
        out.extend(("dH_w", j, int(k)) for k in cols)
        out.append(("dH_b", j))
        out.append(("H", j))
    return out


# -- neuron expression builders (shared by tests and the CLI) -----------------

def build_neuron(sigma: ScalarExpr, fs: Sequence[ScalarExpr], w_row, bias: float = 0.0) -> ScalarExpr:
    """sigma(sum_k w_k f_k + b) as an expression tree."""
    acc = const(float(bias))
    for wk, fk in zip(w_row, fs):
        acc = add(acc, mul(const(float(wk)), fk))
    return compose(sigma, acc)


def build_neuron_family(
    sigma: ScalarExpr,
    fs: Sequence[ScalarExpr],
    weights,
    biases=None,
    variant: str = "I",
) -> dict[NeuronKey, ScalarExpr]:
    """All neurons (and for variant III their parameter derivatives) keyed like
    the predictor output."""
    W = np.atleast_2d(np.asarray(weights, dtype=float))
    n, m = W.shape
    b = np.zeros(n) if biases is None else np.asarray(biases, dtype=float)
    dsigma = differentiate(sigma) if variant == "III" else None
    fam: dict[NeuronKey, ScalarExpr] = {}
    for j in range(n):
        inner = const(float(b[j]))
        for k in range(m):
            inner = add(inner, mul(const(float(W[j, k])), fs[k]))
        fam[("H", j)] = compose(sigma, inner)
        if variant == "III":
            fam[("dH_b", j)] = compose(dsigma, inner)
            for k in range(m):
                fam[("dH_w", j, k)] = mul(compose(dsigma, inner), fs[k])
    return fam
