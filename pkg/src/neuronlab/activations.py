"""Stock activation expressions used throughout the package and the CLI."""

from __future__ import annotations

from .expr import (
    ScalarExpr,
    X,
    compose,
    const,
    eval_expr,
    exp_,
    ipow,
    neg,
    rpow,
    sigmoid_,
    sub,
    tanh_,
)

TANH = tanh_(X)
SIGMOID = sigmoid_(X)
GAUSSIAN = exp_(neg(ipow(X, 2)))
EXP_SQUARE = exp_(ipow(X, 2))
EXP = exp_(X)
ABS_X = rpow(ipow(X, 2), 0.5)
EXP_NEG_ABS = exp_(neg(ABS_X))


def exp_poly_pair(q: int, r: int) -> ScalarExpr:
    """e^{z^q} + e^{-z^r}; q, r odd gives double-sided blow-up."""
    return exp_(ipow(X, q)) + exp_(neg(ipow(X, r)))


def hyper_tower() -> ScalarExpr:
    """exp(e^{z^5}) + exp(e^{-z^3}): the doubly-exponential reference activation."""
    return exp_(exp_(ipow(X, 5))) + exp_(exp_(neg(ipow(X, 3))))


def hyper_tower_centered() -> ScalarExpr:
    """The doubly-exponential activation shifted to vanish at the origin."""
    sigma = hyper_tower()
    return sub(sigma, const(eval_expr(sigma, 0.0)))


def tanh_shift(c: float) -> ScalarExpr:
    """tanh(z + c); c != 0 gives a generic (but bias-degenerate) activation."""
    return compose(TANH, X + const(float(c)))


def sech() -> ScalarExpr:
    """sech(x) = 2/(e^x + e^{-x})."""
    return 2.0 / (exp_(X) + exp_(neg(X)))


NAMED = {
    "tanh": TANH,
    "sigmoid": SIGMOID,
    "gaussian": GAUSSIAN,
    "exp": EXP,
    "exp_square": EXP_SQUARE,
    "exp_neg_abs": EXP_NEG_ABS,
    "sech": sech(),
    "hyper_tower": hyper_tower(),
    "hyper_tower_centered": hyper_tower_centered(),
    "exp7_3": exp_poly_pair(7, 3),
    "exp3_1": exp_poly_pair(3, 1),
}


def resolve(text: str) -> ScalarExpr:
    """Named activation, call sugar like ``exp(x)``, or prefix-notation text."""
    from .expr import parse_text

    text = text.strip()
    if text in NAMED:
        return NAMED[text]
    if text.endswith("(x)") and text[:-3] in NAMED:
        return NAMED[text[:-3]]
    return parse_text(text)
