"""Analytic bump functions via the convex fixed-point iteration.

A base function rho (positive, increasing, strictly convex) and a level
lambda define the recurrence f_1 = 1 + lambda*rho, f_n = 1 + lambda*rho(f_{n-1}),
which converges to a fixed level L on a bounded interval and diverges
doubly-exponentially outside it.  The reciprocal of the rescaled limit is a
positive analytic function ~1 on a plateau and ~0 outside a guard interval.

With the tangent lambda the fixed point is neutral and plateau convergence is
O(1/n); any sub-tangent lambda turns it into a linear-rate attractor, which
`solve_level` exposes for constructions that need tiny plateau error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .expr import (
    EvalFlag,
    ScalarExpr,
    X,
    compose,
    const,
    differentiate,
    div,
    eval_expr,
    eval_grid,
    mul,
    snorm,
    sub,
    add,
)


class BumpError(ValueError):
    pass


class NoTangencyError(BumpError):
    pass


def _rho_value(rho: ScalarExpr, u: float) -> float:
    v = eval_expr(rho, u)
    if isinstance(v, EvalFlag):
        return math.inf if v.kind == "overflow" else math.nan
    return v


def solve_tangency(rho: ScalarExpr, bracket: tuple[float, float] = (1.000001, 8.0)) -> tuple[float, float]:
    """(lambda, L) with the line (x-1)/lambda tangent to rho at L.

    Solves (L-1) rho'(L) - rho(L) = 0 by bisection plus a Newton polish to
    1e-12, then lambda = (L-1)/rho(L).  Raises NoTangencyError if rho is not
    positive/increasing/strictly convex on the bracket or no root exists.
    """
    lo, hi = bracket
    d1 = differentiate(rho)
    d2 = differentiate(d1)
    probes = np.linspace(lo, hi, 33)
    r0, r1, r2 = (eval_grid(e, probes) for e in (rho, d1, d2))
    finite = np.isfinite(r0) & np.isfinite(r1) & np.isfinite(r2)
    if not np.all(r0[finite] > 0) or not np.all(r1[finite] > 0) or not np.all(r2[finite] > 0):
        raise NoTangencyError("base must be positive, increasing and strictly convex on the bracket")

    def g(u: float) -> float:
        return (u - 1.0) * _rho_value(d1, u) - _rho_value(rho, u)

    glo, ghi = g(lo), g(hi)
    if not (glo < 0.0 < ghi):
        raise NoTangencyError(f"no tangency: no sign change of (L-1)rho'-rho on {bracket}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13 * max(1.0, abs(hi)):
            break
    L = 0.5 * (lo + hi)
    for _ in range(8):  # Newton: g'(u) = (u-1) rho''(u)
        gp = (L - 1.0) * _rho_value(d2, L)
        if gp == 0.0 or not math.isfinite(gp):
            break
        L -= g(L) / gp
    lam = (L - 1.0) / _rho_value(rho, L)
    return lam, L


def solve_level(rho: ScalarExpr, lam: float, bracket: tuple[float, float] = (1.0, 8.0)) -> float:
    """Smallest fixed point L of 1 + lam*rho(u) = u (requires sub-tangent lam)."""
    from scipy.optimize import brentq

    def h(u: float) -> float:
        return 1.0 + lam * _rho_value(rho, u) - u

    lo, hi = bracket
    us = np.linspace(lo, hi, 257)
    hvals = [h(float(u)) for u in us]
    for k in range(len(us) - 1):
        if hvals[k] > 0.0 >= hvals[k + 1]:
            return float(brentq(h, float(us[k]), float(us[k + 1]), xtol=1e-14))
    raise BumpError("no fixed point: lambda is above the tangent level")


def divergence_threshold(rho: ScalarExpr, lam: float, level: float) -> float:
    """Smallest argument beyond which the iteration verifiably blows up."""
    u = level * 1.0
    for _ in range(400):
        u *= 1.02
        if first_exceeding(rho, lam, u, 1e12, 500) is not None:
            return u
    raise BumpError("no divergence detected; base may not dominate x")


def iterate_f(rho: ScalarExpr, lam: float, n: int, x: float):
    """n-fold value of the recurrence at x; overflow flag keeps the last
    finite iterate in its detail."""
    if n < 1:
        raise BumpError("n must be >= 1")
    y = float(x)
    for k in range(1, n + 1):
        r = eval_expr(rho, y)
        if isinstance(r, EvalFlag):
            return EvalFlag("overflow", x, f"iteration {k}: last finite iterate {y!r}")
        y2 = 1.0 + lam * r
        if not math.isfinite(y2):
            return EvalFlag("overflow", x, f"iteration {k}: last finite iterate {y!r}")
        y = y2
    return y


def first_exceeding(rho: ScalarExpr, lam: float, x: float, bound: float, n_max: int) -> Optional[int]:
    """Smallest n <= n_max with f_n(x) > bound (None if the orbit stays below)."""
    y = float(x)
    for k in range(1, n_max + 1):
        r = eval_expr(rho, y)
        if isinstance(r, EvalFlag):
            return k
        y = 1.0 + lam * r
        if y > bound:
            return k
    return None


@dataclass(frozen=True)
class BumpSpec:
    """Recipe for one bump: base, level constants, iteration count, intervals."""

    rho: ScalarExpr
    lam: float
    level: float
    n: int = 12
    plateau: tuple[float, float] = (-1.0, 1.0)
    guard: tuple[float, float] = (-1.5, 1.5)

    def __post_init__(self):
        a, b = self.plateau
        a1, b1 = self.guard
        if not (a1 < a < b < b1):
            raise BumpError("guard must properly contain the plateau")
        r = _rho_value(self.rho, self.level)
        if abs(1.0 + self.lam * r - self.level) > 1e-10:
            raise BumpError("fixed-point identity 1 + lam*rho(L) = L violated")

    @staticmethod
    def tangent(rho: ScalarExpr, n: int = 12, plateau=(-1.0, 1.0), guard=(-1.5, 1.5),
                bracket=(1.000001, 8.0)) -> "BumpSpec":
        lam, level = solve_tangency(rho, bracket)
        return BumpSpec(rho, lam, level, n, tuple(plateau), tuple(guard))

    @staticmethod
    def sub_tangent(rho: ScalarExpr, shrink: float = 4.0, n: int = 14,
                    plateau=(-1.0, 1.0), guard=(-2.5, 2.5),
                    bracket=(1.000001, 8.0)) -> "BumpSpec":
        """Tangent lambda divided by `shrink`: linear-rate plateau convergence."""
        lam_t, _ = solve_tangency(rho, bracket)
        lam = lam_t / shrink
        level = solve_level(rho, lam)
        return BumpSpec(rho, lam, level, n, tuple(plateau), tuple(guard))


def _check_even(rho: ScalarExpr) -> bool:
    for s in (0.3, 0.9, 1.7, 2.4):
        a, b = eval_expr(rho, s), eval_expr(rho, -s)
        if isinstance(a, EvalFlag) or isinstance(b, EvalFlag):
            return False
        if abs(a - b) > 1e-10 * max(abs(a), 1.0):
            return False
    return True


def build_bump(spec: BumpSpec) -> ScalarExpr:
    """Expression tree of the bump xi_n = L / f_n(affine(x)).

    The affine map sends the plateau onto [-L, L] (the convergence interval),
    so the plateau endpoints land exactly on the fixed level.  Requires an
    even base (rho(x) = rho_hat(x^2)) so the bump decays on both sides.
    """
    if not _check_even(spec.rho):
        raise BumpError("base must be even-composed, rho(x) = rho_hat(x^2)")
    a, b = spec.plateau
    mid = 0.5 * (a + b)
    scale = 2.0 * spec.level / (b - a)
    u = mul(const(scale), sub(X, const(mid)))
    f = add(const(1.0), mul(const(spec.lam), compose(spec.rho, u)))
    for _ in range(spec.n - 1):
        f = add(const(1.0), mul(const(spec.lam), compose(spec.rho, f)))
    return div(const(spec.level), f)


@dataclass
class BumpReport:
    plateau_dev: float
    tail_sup: float
    min_value: float
    window: float
    deriv_sup: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def verify_bump(
    xi: ScalarExpr,
    a: float,
    b: float,
    a_guard: float,
    b_guard: float,
    eps: float,
    s_max: int = 0,
    window: Optional[float] = None,
    grid: int = 2001,
) -> BumpReport:
    """Certification report: plateau deviation, tail supremum on a finite
    window, positivity, and derivative smallness on the plateau.

    Failures are report entries, never exceptions.  The tail claim is
    asymptotic; the finite window plus monotone divergence of the underlying
    iteration outside the convergence interval justifies the extrapolation.
    """
    if eps <= 0:
        raise BumpError("eps must be positive")
    if window is None:
        mid = 0.5 * (a + b)
        window = abs(mid) + 3.0 * max(b_guard - mid, mid - a_guard)
    plat = np.linspace(a, b, grid)
    vals = eval_grid(xi, plat)
    plateau_dev = float(np.max(np.abs(vals - 1.0))) if np.all(np.isfinite(vals)) else math.inf

    xs = np.linspace(-window, window, 2 * grid)
    outside = (xs < a_guard) | (xs > b_guard)
    tail_vals = eval_grid(xi, xs[outside])
    tail_vals = np.where(np.isfinite(tail_vals), tail_vals, np.inf)
    tail_sup = float(np.max(np.abs(tail_vals))) if tail_vals.size else 0.0

    all_vals = np.concatenate([vals, tail_vals[np.isfinite(tail_vals)]])
    min_value = float(np.min(all_vals))

    report = BumpReport(plateau_dev, tail_sup, min_value, window)
    # far-tail values underflow to +0.0 in doubles; "positive" means strictly
    # positive wherever representable and never negative or NaN
    report.checks = {
        "plateau": plateau_dev < eps,
        "tail": tail_sup < eps,
        "positive": bool(np.all(np.isfinite(vals)) and np.min(vals) > 0.0 and min_value >= 0.0),
    }
    d = xi
    for s in range(1, s_max + 1):
        d = differentiate(d)
        sup = snorm(d, 0, (a, b), grid=grid)
        sup = math.inf if isinstance(sup, EvalFlag) else sup
        report.deriv_sup[s] = sup
        report.checks[f"deriv_{s}"] = sup < eps
    return report
