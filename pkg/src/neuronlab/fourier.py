"""Numerical Fourier transforms for rapidly decaying activations and the
frequency-domain machinery behind the even-activation independence test.

Transforms use composite Gauss-Legendre panels sized to the oscillation, not
an FFT: the frequency ladders are arbitrary and the integrands smooth, so
panel quadrature wins on accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .expr import ScalarExpr, eval_grid

DECAY_FLOOR = 1e-14


class FourierError(ValueError):
    pass


def _values(f, xs):
    if isinstance(f, ScalarExpr):
        return eval_grid(f, xs)
    return np.asarray(f(xs), dtype=np.float64)


def auto_window(f, start: float = 4.0, cap: float = 2048.0) -> float:
    """Smallest doubling window with boundary values below the decay floor."""
    scale = float(np.max(np.abs(_values(f, np.linspace(-2, 2, 41)))))
    x = start
    while x <= cap:
        edge = float(np.max(np.abs(_values(f, np.array([-x, x])))))
        if edge < DECAY_FLOOR * max(scale, 1.0):
            return x
        x *= 1.25
    raise FourierError(f"insufficient decay: |f| at x={cap} still above the floor")


def fit_decay_rate(f, window: float) -> float:
    """Least-squares exponent lam in |f(x)| ~ C e^{-lam |x|} on the tail."""
    xs = np.linspace(0.3 * window, 0.95 * window, 40)
    xs = np.concatenate([-xs[::-1], xs])
    vals = np.abs(_values(f, xs))
    keep = vals > 0
    if keep.sum() < 8:
        raise FourierError("tail underflows; cannot fit a decay rate")
    slope, _ = np.polyfit(np.abs(xs[keep]), np.log(vals[keep]), 1)
    return float(-slope)


@dataclass
class FTResult:
    xis: np.ndarray
    values: np.ndarray          # complex
    window: float
    tail_bound: float

    def __iter__(self):
        return iter((self.values, self.tail_bound))


def _panel_nodes(window: float, xi_abs: float, order: int = 12):
    """Composite GL nodes/weights on [-X, X], split at 0, panel phase <= ~2 rad."""
    per_side = max(4, int(math.ceil(window * (xi_abs + 2.0) / 4.0)))
    edges = np.linspace(0.0, window, per_side + 1)
    gx, gw = np.polynomial.legendre.leggauss(order)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        xs.append(mid + half * gx)
        ws.append(half * gw)
    xs = np.concatenate(xs)
    ws = np.concatenate(ws)
    return np.concatenate([-xs[::-1], xs]), np.concatenate([ws[::-1], ws])


def fourier_transform(
    f,
    xis: Sequence[float],
    window: Optional[float] = None,
    order: int = 12,
) -> FTResult:
    """f_hat(xi) = integral f(z) e^{-i xi z} dz by panel quadrature.

    Requires |f| below 1e-14 (relative) at the window edge; the reported tail
    bound uses the fitted exponential decay model |tail| <= 2 |f(X)| / lam.
    """
    xis = np.asarray(xis, dtype=float)
    if window is None:
        window = auto_window(f)
    else:
        scale = float(np.max(np.abs(_values(f, np.linspace(-2, 2, 41)))))
        edge = float(np.max(np.abs(_values(f, np.array([-window, window])))))
        if edge >= DECAY_FLOOR * max(scale, 1.0):
            raise FourierError(f"insufficient decay at the window edge x={window}")
    lam = max(fit_decay_rate(f, window), 1e-6)
    edge = float(np.max(np.abs(_values(f, np.array([-window, window])))))
    tail = 2.0 * edge / lam
    out = np.empty(len(xis), dtype=complex)
    for i, xi in enumerate(xis):
        xs, ws = _panel_nodes(window, abs(float(xi)), order)
        vals = _values(f, xs)
        out[i] = np.sum(ws * vals * np.cos(xi * xs)) - 1j * np.sum(ws * vals * np.sin(xi * xs))
    return FTResult(xis, out, window, tail)


def plancherel_check(f, xi_window: float) -> tuple[float, float]:
    """(integral |f|^2, (1/2pi) integral |f_hat|^2) for a decaying function.

    Both sides use composite panels: transforms like sech have poles close to
    the real frequency axis, which starves a single wide Gauss rule."""
    window = auto_window(f)
    xs, ws = _panel_nodes(window, 0.0, order=12)
    vals = _values(f, xs)
    lhs = float(np.sum(ws * vals * vals))
    xis, xw = _panel_nodes(xi_window, 0.0, order=12)
    fh = fourier_transform(f, xis, window=window).values
    rhs = float(np.sum(xw * np.abs(fh) ** 2) / (2.0 * math.pi))
    return lhs, rhs


RATIO_FLOOR = 1e-6


def ft_decay_test(
    f,
    w_tilde: float,
    w: float,
    xis: Optional[Sequence[float]] = None,
) -> Union[bool, str]:
    """True iff |f_hat(w xi) / f_hat(w_tilde xi)| decays monotonically below 1e-6.

    Requires 0 < w_tilde < w.  Near-zero denominators are skipped; if more
    than 20% of the ladder is skipped the test is inconclusive.
    """
    if not (0.0 < w_tilde < w):
        raise FourierError("need 0 < w_tilde < w")
    if xis is None:
        xis = np.geomspace(0.25, 8.0, 24)
    xis = np.asarray(xis, dtype=float)
    num = np.abs(fourier_transform(f, w * xis).values)
    den = np.abs(fourier_transform(f, w_tilde * xis).values)
    floor = float(np.max(den)) * 1e-13
    keep = den > floor
    if np.count_nonzero(~keep) > 0.2 * len(xis):
        return "inconclusive"
    ratios = num[keep] / den[keep]
    # monotone-decrease witness up to the first crossing of the floor; past it
    # the numerator sits at the quadrature noise level and ratios are noise
    below = np.nonzero(ratios < RATIO_FLOOR)[0]
    if below.size == 0:
        return False
    stop = int(below[0])
    run = ratios[max(0, stop - 6): stop + 1]
    return bool(np.all(np.diff(run) < 0))


def trig_sum_lower(
    a: Sequence[float],
    b: Sequence[float],
    scan: tuple[float, float] = (200.0, 800.0),
    windows: int = 4,
    step: float = 0.01,
) -> float:
    """Estimated limsup lower bound for |sum a_k e^{i b_k z}| as z -> infinity.

    Takes the max over the last of several late windows; with rationally
    independent frequencies the phase alignment recurs by equidistribution.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(b <= 0) or len(set(b.tolist())) != len(b):
        raise FourierError("frequencies must be distinct and positive")
    if np.any(a == 0):
        raise FourierError("coefficients must be nonzero")
    t0, t1 = scan
    edges = np.linspace(t0, t1, windows + 1)
    zs = np.arange(edges[-2], edges[-1], step)
    vals = np.abs(np.exp(1j * np.outer(zs, b)) @ a)
    return float(np.max(vals))


@dataclass
class SchwartzReport:
    flags: set = field(default_factory=set)  # subset of {even, rapid-decay, nonvanishing}
    lam: Optional[float] = None
    min_abs: float = 0.0


def even_schwartz_check(
    f,
    grid: tuple[float, float, int] = (-12.0, 12.0, 481),
    lam_min: float = 0.05,
) -> SchwartzReport:
    """Flags: evenness on the grid, exponential tail decay (with fitted rate),
    and nonvanishing; failures clear flags rather than raising."""
    lo, hi, n = grid
    xs = np.linspace(lo, hi, int(n))
    vals = _values(f, xs)
    report = SchwartzReport()
    scale = max(float(np.max(np.abs(vals))), 1e-300)
    if float(np.max(np.abs(vals - vals[::-1]))) < 1e-10 * scale:
        report.flags.add("even")
    try:
        window = auto_window(f)
        lam = fit_decay_rate(f, window)
        report.lam = lam
        if lam > lam_min:
            report.flags.add("rapid-decay")
    except FourierError:
        report.lam = None
    report.min_abs = float(np.min(np.abs(vals)))
    # a sign change certifies a zero between grid points; grid minima alone
    # cannot distinguish a zero crossing from a rapidly decaying tail
    sign_change = bool(np.any(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0))
    if report.min_abs > 0.0 and not sign_change:
        report.flags.add("nonvanishing")
    return report
