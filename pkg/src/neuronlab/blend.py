"""Blending two activations through an analytic bump, and the global
tanh-approximation construction built from an inner and an outer blend."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .activations import EXP_SQUARE, TANH
from .bump import BumpSpec, build_bump
from .expr import (
    ScalarExpr,
    X,
    compose,
    const,
    differentiate,
    eval_grid,
    exp_,
    ipow,
    mul,
    rpow,
    snorm,
    sub,
)


def blend_activations(sigma: ScalarExpr, sigma0: ScalarExpr, xi: ScalarExpr) -> ScalarExpr:
    """xi*sigma + (1 - xi)*sigma0."""
    return xi * sigma + (const(1.0) - xi) * sigma0


def leibniz_expansion(sigma: ScalarExpr, sigma0: ScalarExpr, xi: ScalarExpr, s: int) -> ScalarExpr:
    """Order-s derivative of the blend written out via the Leibniz rule:

    xi sigma^(s) + (1-xi) sigma0^(s) + sum_{k=1}^{s} C(s,k) xi^(k) (sigma^(s-k) - sigma0^(s-k))
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    dsig = [sigma]
    dsig0 = [sigma0]
    dxi = [xi]
    for _ in range(s):
        dsig.append(differentiate(dsig[-1]))
        dsig0.append(differentiate(dsig0[-1]))
        dxi.append(differentiate(dxi[-1]))
    out = xi * dsig[s] + (const(1.0) - xi) * dsig0[s]
    for k in range(1, s + 1):
        out = out + const(float(math.comb(s, k))) * dxi[k] * (dsig[s - k] - dsig0[s - k])
    return out


def snorm_distance(f: ScalarExpr, g: ScalarExpr, s_order: int, interval, grid: int = 2001):
    """S-order sup-norm of f - g on the interval (grid supremum)."""
    return snorm(sub(f, g), s_order, interval, grid)


# -- tanh approximation -------------------------------------------------------

def _abs_base() -> ScalarExpr:
    return exp_(rpow(ipow(X, 2), 0.5))  # e^{|x|}: even but only piecewise analytic


def default_inner_bump(n: int = 14, base: str = "exp_square") -> BumpSpec:
    rho = EXP_SQUARE if base == "exp_square" else _abs_base()
    return BumpSpec.sub_tangent(rho, shrink=4.0, n=n, plateau=(-3.1, 3.1), guard=(-6.5, 6.5))


def default_outer_bump(n: int = 5, base: str = "exp_square") -> BumpSpec:
    rho = EXP_SQUARE if base == "exp_square" else _abs_base()
    return BumpSpec.sub_tangent(rho, shrink=4.0, n=n, plateau=(-6.2, 6.2), guard=(-13.0, 13.0))


@dataclass
class TanhApprox:
    alpha: float
    expr: ScalarExpr
    inner: ScalarExpr  # the inner blend of tanh with e^{x^2}


def build_tanh_approx(
    alpha: float,
    inner_bump: Optional[BumpSpec] = None,
    outer_bump: Optional[BumpSpec] = None,
    base: str = "exp_square",
) -> TanhApprox:
    """zeta_outer(alpha x) * sigma_inner(x) + (1 - zeta_outer(alpha x)) * e^{x^2},
    where sigma_inner blends tanh with e^{x^2} through the inner bump.

    The outer plateau covers alpha*[-3,3] for every alpha <= 2, and the bump
    deviation from 1 shrinks strictly as its argument moves toward the
    plateau edge, so the sup-distance to tanh on [-3,3] decreases in alpha.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if inner_bump is None:
        inner_bump = default_inner_bump(base=base)
    if outer_bump is None:
        outer_bump = default_outer_bump(base=base)
    xi_in = build_bump(inner_bump)
    xi_out = build_bump(outer_bump)
    sigma_inner = blend_activations(TANH, EXP_SQUARE, xi_in)
    zeta = compose(xi_out, mul(const(float(alpha)), X))
    expr = zeta * sigma_inner + (const(1.0) - zeta) * EXP_SQUARE
    return TanhApprox(float(alpha), expr, sigma_inner)


def tanh_sup_distance(approx: TanhApprox, interval=(-3.0, 3.0), grid: int = 601) -> float:
    import numpy as np

    xs = np.linspace(interval[0], interval[1], grid)
    dev = eval_grid(approx.expr, xs) - np.tanh(xs)
    return float(np.max(np.abs(dev)))
