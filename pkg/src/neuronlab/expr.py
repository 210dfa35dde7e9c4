"""Immutable scalar expression trees: construction, evaluation, differentiation.

Every activation used anywhere in the package is a :class:`ScalarExpr` over a
single real variable.  Trees are immutable and hash-cached, so structurally
shared subtrees behave like a DAG; evaluation is pure and thread-safe.

Evaluation never returns a silent NaN: out-of-range magnitudes come back as
an :class:`EvalFlag` with kind ``overflow``, ``domain`` or ``cancellation``.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Union

import numpy as np

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

_UNARY = frozenset({"exp", "log", "tanh", "sigmoid", "neg"})
_BINARY = frozenset({"add", "sub", "mul", "div", "compose"})
_POW = frozenset({"ipow", "rpow"})
_LEAF = frozenset({"const", "var"})

LOG_HUGE = 709.0  # exp beyond this overflows float64


class ExprError(ValueError):
    """Malformed tree or unsupported construction."""


class ExprTooLarge(ExprError):
    """Tree exceeded the symbolic-manipulation size guard."""


class ScalarExpr:
    """One node of an expression tree over a single real variable."""

    __slots__ = ("kind", "args", "param", "_hash", "_size")

    def __init__(self, kind: str, args: tuple = (), param=None):
        if kind in _LEAF:
            if args:
                raise ExprError(f"{kind} takes no children")
        elif kind in _UNARY:
            if len(args) != 1:
                raise ExprError(f"{kind} takes one child")
        elif kind in _BINARY:
            if len(args) != 2:
                raise ExprError(f"{kind} takes two children")
        elif kind in _POW:
            if len(args) != 1:
                raise ExprError(f"{kind} takes one child")
            if kind == "ipow" and not isinstance(param, int):
                raise ExprError("ipow exponent must be int")
            if kind == "rpow" and not isinstance(param, float):
                raise ExprError("rpow exponent must be float")
        else:
            raise ExprError(f"unknown node kind {kind!r}")
        if kind == "const" and not isinstance(param, float):
            raise ExprError("const payload must be float")
        if any(not isinstance(a, ScalarExpr) for a in args):
            raise ExprError("children must be ScalarExpr")
        self.kind = kind
        self.args = args
        self.param = param
        self._hash = hash((kind, param, tuple(id(a) if False else a._hash for a in args)))
        self._size = 1 + sum(a._size for a in args)

    # -- identity ---------------------------------------------------------
    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, ScalarExpr):
            return NotImplemented
        if self._hash != other._hash or self.kind != other.kind or self.param != other.param:
            return False
        return self.args == other.args

    def __repr__(self):
        return f"ScalarExpr({to_text(self)})"

    @property
    def size(self) -> int:
        return self._size

    # -- operator sugar ---------------------------------------------------
    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return sub(self, _coerce(other))

    def __rsub__(self, other):
        return sub(_coerce(other), self)

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __pow__(self, p):
        if isinstance(p, int):
            return ipow(self, p)
        return rpow(self, float(p))

    def __neg__(self):
        return neg(self)

    def __call__(self, inner: "ScalarExpr") -> "ScalarExpr":
        return compose(self, inner)


def _coerce(v) -> ScalarExpr:
    if isinstance(v, ScalarExpr):
        return v
    if isinstance(v, (int, float)):
        return const(float(v))
    raise ExprError(f"cannot coerce {v!r} to ScalarExpr")


# -- constructors (with peephole constant folding) -------------------------

def const(c: float) -> ScalarExpr:
    return ScalarExpr("const", (), float(c))


def var() -> ScalarExpr:
    return ScalarExpr("var")


X = var()
ZERO = const(0.0)
ONE = const(1.0)


def _is_const(e: ScalarExpr, value=None) -> bool:
    if e.kind != "const":
        return False
    return value is None or e.param == value


def add(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr:
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    if _is_const(a) and _is_const(b):
        return const(a.param + b.param)
    return ScalarExpr("add", (a, b))


def sub(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr:
    if _is_const(b, 0.0):
        return a
    if _is_const(a) and _is_const(b):
        return const(a.param - b.param)
    return ScalarExpr("sub", (a, b))


def neg(a: ScalarExpr) -> ScalarExpr:
    if _is_const(a):
        return const(-a.param)
    return ScalarExpr("neg", (a,))


def mul(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr:
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if _is_const(a) and _is_const(b):
        return const(a.param * b.param)
    return ScalarExpr("mul", (a, b))


def div(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr:
    if _is_const(b, 1.0):
        return a
    if _is_const(a, 0.0) and not _is_const(b, 0.0):
        return ZERO
    return ScalarExpr("div", (a, b))


def ipow(a: ScalarExpr, n: int) -> ScalarExpr:
    if n == 0:
        return ONE
    if n == 1:
        return a
    if _is_const(a):
        return const(a.param ** n)
    return ScalarExpr("ipow", (a,), int(n))


def rpow(a: ScalarExpr, p: float) -> ScalarExpr:
    if p == 0.0:
        return ONE
    if p == 1.0:
        return a
    return ScalarExpr("rpow", (a,), float(p))


def exp_(a: ScalarExpr) -> ScalarExpr:
    if _is_const(a):
        return const(math.exp(a.param)) if a.param < LOG_HUGE else ScalarExpr("exp", (a,))
    return ScalarExpr("exp", (a,))


def log_(a: ScalarExpr) -> ScalarExpr:
    return ScalarExpr("log", (a,))


def tanh_(a: ScalarExpr) -> ScalarExpr:
    if _is_const(a):
        return const(math.tanh(a.param))
    return ScalarExpr("tanh", (a,))


def sigmoid_(a: ScalarExpr) -> ScalarExpr:
    if _is_const(a):
        return const(_sigmoid(a.param))
    return ScalarExpr("sigmoid", (a,))


def compose(f: ScalarExpr, g: ScalarExpr) -> ScalarExpr:
    """f o g, i.e. x -> f(g(x))."""
    if g.kind == "var":
        return f
    if f.kind == "var":
        return g
    return ScalarExpr("compose", (f, g))


# -- evaluation -------------------------------------------------------------

@dataclass(frozen=True)
class EvalFlag:
    """Tagged non-value outcome of an evaluation."""

    kind: str  # "overflow" | "domain" | "cancellation"
    x: float | None = None
    detail: str = ""

    def __bool__(self):  # flags are falsy so `if result:` reads naturally
        return False


EvalResult = Union[float, EvalFlag]


def _sigmoid_stable(z: float) -> float:
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    w = math.exp(z)
    return w / (1.0 + w)


_sigmoid = _sigmoid_stable


class _Domain(Exception):
    def __init__(self, detail):
        self.detail = detail


def _eval_node(e: ScalarExpr, x: float) -> float:
    """Raw IEEE-style evaluation; +-inf marks overflow, raises _Domain."""
    k = e.kind
    if k == "const":
        return e.param
    if k == "var":
        return x
    if k == "compose":
        return _eval_node(e.args[0], _eval_node(e.args[1], x))
    if k in _UNARY:
        v = _eval_node(e.args[0], x)
        if k == "neg":
            return -v
        if k == "exp":
            try:
                return math.exp(v)
            except OverflowError:
                return math.inf
        if k == "log":
            if math.isinf(v) and v > 0:
                return math.inf
            if v <= 0.0:
                raise _Domain(f"log of non-positive value {v!r}")
            return math.log(v)
        if k == "tanh":
            if math.isinf(v):
                return math.copysign(1.0, v)
            return math.tanh(v)
        if k == "sigmoid":
            if math.isinf(v):
                return 1.0 if v > 0 else 0.0
            return _sigmoid_stable(v)
    if k in _POW:
        v = _eval_node(e.args[0], x)
        p = e.param
        if k == "ipow":
            try:
                return v ** p
            except OverflowError:
                return math.inf if (v > 0 or p % 2 == 0) else -math.inf
            except ZeroDivisionError:
                raise _Domain("zero base with negative exponent")
        if v < 0.0:
            raise _Domain(f"real power of negative base {v!r}")
        try:
            return v ** p
        except OverflowError:
            return math.inf
        except ZeroDivisionError:
            raise _Domain("zero base with negative exponent")
    a = _eval_node(e.args[0], x)
    b = _eval_node(e.args[1], x)
    try:
        if k == "add":
            return a + b
        if k == "sub":
            return a - b
        if k == "mul":
            return a * b
        if k == "div":
            if b == 0.0:
                if a == 0.0:
                    raise _Domain("0/0")
                return math.copysign(math.inf, a) * math.copysign(1.0, b)
            return a / b
    except OverflowError:
        return math.inf
    raise ExprError(f"unknown kind {k}")


def eval_expr(e: ScalarExpr, x: float) -> EvalResult:
    """Evaluate at a finite x; overflow/domain trouble returns an EvalFlag."""
    if not math.isfinite(x):
        raise ExprError("eval requires finite x")
    try:
        v = _eval_node(e, float(x))
    except _Domain as d:
        return EvalFlag("domain", x, d.detail)
    if math.isnan(v):
        return EvalFlag("overflow", x, "indeterminate after overflow")
    if math.isinf(v):
        return EvalFlag("overflow", x)
    return v


def eval_grid(e: ScalarExpr, xs) -> np.ndarray:
    """Vectorized evaluation; overflow maps to +-inf and domain errors to NaN.

    This is the hot path: it compiles the tree once and runs the postfix
    program through the compiled kernel (or the numpy fallback).
    """
    from . import kernel

    xs = np.asarray(xs, dtype=np.float64)
    return kernel.run(compile_program(e), xs)


def eval_complex(e: ScalarExpr, z: complex) -> complex:
    """Complex-arithmetic evaluation (used by the pole/blow-up machinery)."""
    import cmath

    k = e.kind
    if k == "const":
        return complex(e.param)
    if k == "var":
        return z
    if k == "compose":
        return eval_complex(e.args[0], eval_complex(e.args[1], z))
    if k in _UNARY:
        v = eval_complex(e.args[0], z)
        if k == "neg":
            return -v
        if k == "exp":
            if v.real > LOG_HUGE:
                return complex(math.inf, 0.0)
            return cmath.exp(v)
        if k == "log":
            return cmath.log(v)
        if k == "tanh":
            return _tanh_complex(v)
        if k == "sigmoid":
            return sigmoid_complex(v)
    if k in _POW:
        v = eval_complex(e.args[0], z)
        return v ** e.param
    a = eval_complex(e.args[0], z)
    b = eval_complex(e.args[1], z)
    if k == "add":
        return a + b
    if k == "sub":
        return a - b
    if k == "mul":
        return a * b
    if k == "div":
        return a / b
    raise ExprError(f"unknown kind {k}")


def sigmoid_complex(z: complex) -> complex:
    """Overflow-stable logistic function on the complex plane."""
    import cmath

    if z.real >= 0.0:
        return 1.0 / (1.0 + cmath.exp(-z))
    w = cmath.exp(z)
    return w / (1.0 + w)


def _tanh_complex(z: complex) -> complex:
    return 2.0 * sigmoid_complex(2.0 * z) - 1.0


# -- signed-log evaluation ---------------------------------------------------

@dataclass(frozen=True)
class SignedLogValue:
    """(sign, log|v|) representation; survives exp-tower magnitudes."""

    sign: int  # -1 | 0 | +1
    log_abs: float  # -inf encodes zero

    @staticmethod
    def from_float(v: float) -> "SignedLogValue":
        if v == 0.0:
            return SignedLogValue(0, -math.inf)
        return SignedLogValue(1 if v > 0 else -1, math.log(abs(v)))

    def to_float(self) -> float:
        if self.sign == 0:
            return 0.0
        if self.log_abs > LOG_HUGE:
            return math.copysign(math.inf, self.sign)
        return self.sign * math.exp(self.log_abs)

    def is_zero(self) -> bool:
        return self.sign == 0 or self.log_abs == -math.inf


_CANCEL_RTOL = 1e-12


def _slv_add(a: SignedLogValue, b: SignedLogValue, x, op_sign=1) -> SignedLogValue:
    bs = b.sign * op_sign
    if a.is_zero():
        return SignedLogValue(bs, b.log_abs)
    if b.is_zero():
        return a
    la, lb = a.log_abs, b.log_abs
    if a.sign == bs:
        return SignedLogValue(a.sign, float(np.logaddexp(la, lb)))
    # opposite signs: exact in value space whenever both magnitudes are
    # representable (near-cancellation there is the true answer, not noise)
    if max(la, lb) <= 700.0:
        return SignedLogValue.from_float(a.to_float() + bs * math.exp(lb))
    if la == lb:
        raise _Cancel(x)
    hi, lo = (la, lb) if la > lb else (lb, la)
    s = a.sign if la > lb else bs
    if hi - lo <= _CANCEL_RTOL * max(abs(hi), 1.0):
        raise _Cancel(x)
    return SignedLogValue(s, hi + math.log1p(-math.exp(lo - hi)))


class _Cancel(Exception):
    def __init__(self, x):
        self.x = x


def _slv_eval(e: ScalarExpr, v: SignedLogValue, x: float) -> SignedLogValue:
    k = e.kind
    if k == "const":
        return SignedLogValue.from_float(e.param)
    if k == "var":
        return v
    if k == "compose":
        return _slv_eval(e.args[0], _slv_eval(e.args[1], v, x), x)
    if k == "neg":
        a = _slv_eval(e.args[0], v, x)
        return SignedLogValue(-a.sign, a.log_abs)
    if k == "exp":
        a = _slv_eval(e.args[0], v, x)
        if a.is_zero():
            return SignedLogValue(1, 0.0)
        if a.log_abs > LOG_HUGE:
            # magnitude beyond even log-domain range: keep the (known) sign
            # and an infinite log so downstream algebra stays consistent
            if a.sign > 0:
                return SignedLogValue(1, math.inf)
            return SignedLogValue(0, -math.inf)
        return SignedLogValue(1, a.sign * math.exp(a.log_abs))
    if k == "log":
        a = _slv_eval(e.args[0], v, x)
        if a.sign <= 0:
            raise _Domain("log of non-positive value")
        return SignedLogValue.from_float(a.log_abs)
    if k == "tanh" or k == "sigmoid":
        a = _slv_eval(e.args[0], v, x)
        if a.log_abs <= LOG_HUGE:
            f = math.tanh(a.to_float()) if k == "tanh" else _sigmoid_stable(a.to_float())
            return SignedLogValue.from_float(f)
        if k == "tanh":
            return SignedLogValue(a.sign, 0.0)
        if a.sign > 0:
            return SignedLogValue(1, 0.0)
        return SignedLogValue(0, -math.inf)  # sigmoid(-huge) underflows to 0
    if k == "ipow":
        a = _slv_eval(e.args[0], v, x)
        n = e.param
        if a.is_zero():
            if n > 0:
                return SignedLogValue(0, -math.inf)
            raise _Domain("zero base with negative exponent")
        sign = a.sign if n % 2 else 1
        return SignedLogValue(sign, n * a.log_abs)
    if k == "rpow":
        a = _slv_eval(e.args[0], v, x)
        if a.sign < 0:
            raise _Domain("real power of negative base")
        if a.is_zero():
            if e.param > 0:
                return SignedLogValue(0, -math.inf)
            raise _Domain("zero base with negative exponent")
        return SignedLogValue(1, e.param * a.log_abs)
    a = _slv_eval(e.args[0], v, x)
    b = _slv_eval(e.args[1], v, x)
    if k == "add":
        return _slv_add(a, b, x)
    if k == "sub":
        return _slv_add(a, b, x, op_sign=-1)
    if k == "mul":
        if a.is_zero() or b.is_zero():
            la = a.log_abs + b.log_abs  # 0 * overflow is indeterminate
            if math.isnan(la):
                raise _Cancel(x)
            return SignedLogValue(0, -math.inf)
        return SignedLogValue(a.sign * b.sign, a.log_abs + b.log_abs)
    if k == "div":
        if b.is_zero():
            raise _Domain("division by zero")
        if a.is_zero():
            return SignedLogValue(0, -math.inf)
        la = a.log_abs - b.log_abs
        if math.isnan(la):
            raise _Cancel(x)  # overflow / overflow
        return SignedLogValue(a.sign * b.sign, la)
    raise ExprError(f"unknown kind {k}")


def eval_log_domain(e: ScalarExpr, x: float) -> Union[SignedLogValue, EvalFlag]:
    """Evaluate to (sign, log-magnitude); exact through exp towers."""
    try:
        return _slv_eval(e, SignedLogValue.from_float(float(x)), float(x))
    except _Cancel:
        return EvalFlag("cancellation", x, "sum of huge opposite-sign terms")
    except _Domain as d:
        return EvalFlag("domain", x, d.detail)


# -- differentiation ---------------------------------------------------------

MAX_DIFF_NODES = 500_000


def _diff(e: ScalarExpr, cache: dict) -> ScalarExpr:
    got = cache.get(id(e))
    if got is not None:
        return got
    k = e.kind
    if k == "const":
        d = ZERO
    elif k == "var":
        d = ONE
    elif k == "add":
        d = add(_diff(e.args[0], cache), _diff(e.args[1], cache))
    elif k == "sub":
        d = sub(_diff(e.args[0], cache), _diff(e.args[1], cache))
    elif k == "neg":
        d = neg(_diff(e.args[0], cache))
    elif k == "mul":
        a, b = e.args
        d = add(mul(_diff(a, cache), b), mul(a, _diff(b, cache)))
    elif k == "div":
        a, b = e.args
        d = div(sub(mul(_diff(a, cache), b), mul(a, _diff(b, cache))), ipow(b, 2))
    elif k == "ipow":
        (a,) = e.args
        d = mul(mul(const(float(e.param)), ipow(a, e.param - 1)), _diff(a, cache))
    elif k == "rpow":
        (a,) = e.args
        d = mul(mul(const(e.param), rpow(a, e.param - 1.0)), _diff(a, cache))
    elif k == "exp":
        d = mul(e, _diff(e.args[0], cache))
    elif k == "log":
        d = div(_diff(e.args[0], cache), e.args[0])
    elif k == "tanh":
        d = mul(sub(ONE, ipow(ScalarExpr("tanh", e.args), 2)), _diff(e.args[0], cache))
    elif k == "sigmoid":
        s = ScalarExpr("sigmoid", e.args)
        d = mul(mul(s, sub(ONE, s)), _diff(e.args[0], cache))
    elif k == "compose":
        f, g = e.args
        d = mul(compose(_diff(f, {}), g), _diff(g, cache))
    else:
        raise ExprError(f"unknown kind {k}")
    cache[id(e)] = d
    return d


def differentiate(e: ScalarExpr, order: int = 1) -> ScalarExpr:
    """Symbolic derivative of the given order (order >= 1)."""
    if order < 1:
        raise ExprError("order must be >= 1")
    out = e
    for _ in range(order):
        out = _diff(out, {})
        if out.size > MAX_DIFF_NODES:
            raise ExprTooLarge(f"derivative tree has {out.size} nodes")
    return out


def derivatives_upto(e: ScalarExpr, s_max: int) -> list[ScalarExpr]:
    """[e, e', ..., e^(s_max)]."""
    out = [e]
    for _ in range(s_max):
        out.append(differentiate(out[-1]))
    return out


# -- S-order sup norm --------------------------------------------------------

def snorm(e: ScalarExpr, s_order: int, interval: tuple[float, float], grid: int = 2001):
    """Grid supremum of sum_{s<=S} |f^(s)(x)| over the interval.

    Sampled on `grid` equispaced points; monotone in S and grid refinement by
    construction.  Returns the supremum, or an overflow EvalFlag carrying the
    first offending x.
    """
    lo, hi = interval
    if not (s_order >= 0 and lo < hi and grid >= 2):
        raise ExprError("snorm requires S >= 0, lo < hi, grid >= 2")
    xs = np.linspace(lo, hi, grid)
    total = np.zeros_like(xs)
    for d in derivatives_upto(e, s_order):
        vals = eval_grid(d, xs)
        bad = ~np.isfinite(vals)
        if bad.any():
            return EvalFlag("overflow", float(xs[np.argmax(bad)]))
        total += np.abs(vals)
    return float(total.max())


# -- textual serialization ---------------------------------------------------

_FMT_NAMES = {
    "add": "add", "sub": "sub", "mul": "mul", "div": "div", "neg": "neg",
    "exp": "exp", "log": "log", "tanh": "tanh", "sigmoid": "sigmoid",
    "compose": "compose",
}


def to_text(e: ScalarExpr) -> str:
    """Prefix-notation text form, e.g. ``(add (exp (pow x 7)) x)``."""
    k = e.kind
    if k == "const":
        return format(e.param, ".17g")
    if k == "var":
        return "x"
    if k in ("ipow", "rpow"):
        p = e.param if k == "ipow" else format(e.param, ".17g")
        return f"(pow {to_text(e.args[0])} {p})"
    inner = " ".join(to_text(a) for a in e.args)
    return f"({_FMT_NAMES[k]} {inner})"


def _tokenize(s: str) -> list[str]:
    return s.replace("(", " ( ").replace(")", " ) ").split()


_ARITY = {"add": 2, "sub": 2, "mul": 2, "div": 2, "compose": 2, "pow": 2,
          "neg": 1, "exp": 1, "log": 1, "tanh": 1, "sigmoid": 1}
_BUILDERS = {"add": add, "sub": sub, "mul": mul, "div": div, "compose": compose,
             "neg": neg, "exp": exp_, "log": log_, "tanh": tanh_,
             "sigmoid": sigmoid_}


def parse_text(s: str) -> ScalarExpr:
    """Parse the prefix notation produced by :func:`to_text`."""
    tokens = _tokenize(s)
    pos = 0

    def parse_one():
        """Returns a ScalarExpr, or the raw token string for bare numbers."""
        nonlocal pos
        if pos >= len(tokens):
            raise ExprError("unexpected end of input")
        tok = tokens[pos]
        pos += 1
        if tok == ")":
            raise ExprError("unexpected ')'")
        if tok != "(":
            if tok == "x":
                return X
            if _is_number(tok):
                return tok
            raise ExprError(f"unknown token {tok!r}")
        if pos >= len(tokens):
            raise ExprError("unexpected end of input")
        head = tokens[pos]
        pos += 1
        args = []
        while pos < len(tokens) and tokens[pos] != ")":
            args.append(parse_one())
        if pos >= len(tokens):
            raise ExprError("missing closing parenthesis")
        pos += 1  # consume ')'
        return _build(head, args)

    def _as_expr(a):
        return const(float(a)) if isinstance(a, str) else a

    def _build(head, args):
        if head not in _ARITY:
            raise ExprError(f"unknown operator {head!r}")
        if len(args) != _ARITY[head]:
            raise ExprError(f"{head} expects {_ARITY[head]} arguments, got {len(args)}")
        if head == "pow":
            base, raw = _as_expr(args[0]), args[1]
            if not isinstance(raw, str):
                raise ExprError("pow exponent must be a numeric literal")
            fv = float(raw)
            if fv == int(fv) and "." not in raw and "e" not in raw.lower():
                return ipow(base, int(fv))
            return rpow(base, fv)
        return _BUILDERS[head](*[_as_expr(a) for a in args])

    out = _as_expr(parse_one())
    if pos != len(tokens):
        raise ExprError(f"trailing input near token {pos}")
    return out


def _is_number(tok: str) -> bool:
    try:
        float(tok)
        return True
    except ValueError:
        return False


# -- program compilation for the grid kernel ---------------------------------

OP_CONST, OP_VAR, OP_ADD, OP_SUB, OP_MUL, OP_DIV, OP_NEG = range(7)
OP_IPOW, OP_RPOW, OP_EXP, OP_LOG, OP_TANH, OP_SIGMOID = range(7, 13)
OP_PUSH_FRAME, OP_POP_FRAME = 13, 14


class Program:
    """Flat postfix form of a tree, ready for the evaluation kernel."""

    __slots__ = ("ops", "params", "stack_need", "frame_need")

    def __init__(self, ops, params, stack_need, frame_need):
        self.ops = np.asarray(ops, dtype=np.int32)
        self.params = np.asarray(params, dtype=np.float64)
        self.stack_need = stack_need
        self.frame_need = frame_need


_KIND_TO_OP = {
    "add": OP_ADD, "sub": OP_SUB, "mul": OP_MUL, "div": OP_DIV, "neg": OP_NEG,
    "exp": OP_EXP, "log": OP_LOG, "tanh": OP_TANH, "sigmoid": OP_SIGMOID,
}


def compile_program(e: ScalarExpr) -> Program:
    ops: list[int] = []
    params: list[float] = []

    def emit(node: ScalarExpr):
        k = node.kind
        if k == "const":
            ops.append(OP_CONST)
            params.append(node.param)
        elif k == "var":
            ops.append(OP_VAR)
            params.append(0.0)
        elif k == "compose":
            f, g = node.args
            emit(g)
            ops.append(OP_PUSH_FRAME)
            params.append(0.0)
            emit(f)
            ops.append(OP_POP_FRAME)
            params.append(0.0)
        elif k in ("ipow", "rpow"):
            emit(node.args[0])
            ops.append(OP_IPOW if k == "ipow" else OP_RPOW)
            params.append(float(node.param))
        else:
            for a in node.args:
                emit(a)
            ops.append(_KIND_TO_OP[k])
            params.append(0.0)

    emit(e)
    depth = frame = 0
    max_depth = max_frame = 0
    for op in ops:
        if op in (OP_CONST, OP_VAR):
            depth += 1
        elif op in (OP_ADD, OP_SUB, OP_MUL, OP_DIV):
            depth -= 1
        elif op == OP_PUSH_FRAME:
            depth -= 1
            frame += 1
        elif op == OP_POP_FRAME:
            frame -= 1
        max_depth = max(max_depth, depth)
        max_frame = max(max_frame, frame)
    return Program(ops, params, max_depth + 1, max_frame + 1)
