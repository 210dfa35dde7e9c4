"""Fully-connected networks: parameter layout, forward pass, width embeddings,
and leading-order behaviour at the origin."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .expr import EvalFlag, ExprTooLarge, ScalarExpr, differentiate, eval_expr, eval_grid


class NetworkError(ValueError):
    pass


@dataclass(frozen=True)
class NetworkStructure:
    """Shape {m_l} with input dimension d; the output layer has width 1."""

    d: int
    widths: tuple[int, ...]  # m_1 .. m_L, m_L == 1
    bias: bool = True

    def __post_init__(self):
        if self.d < 1 or len(self.widths) < 1:
            raise NetworkError("need d >= 1 and at least one layer")
        if any(m < 1 for m in self.widths):
            raise NetworkError("widths must be >= 1")
        if self.widths[-1] != 1:
            raise NetworkError("output width must be 1")

    @property
    def depth(self) -> int:
        return len(self.widths)

    @property
    def hidden_widths(self) -> tuple[int, ...]:
        return self.widths[:-1]

    def fan_in(self, layer: int) -> int:
        """Width of layer-1 inputs feeding hidden layer `layer` (1-based)."""
        return self.d if layer == 1 else self.widths[layer - 2]

    @property
    def param_count(self) -> int:
        L = self.depth
        n = self.widths[L - 2] if L >= 2 else self.d
        total = n + (1 if self.bias else 0)  # output weights a, bias b
        for l in range(1, L):
            total += self.widths[l - 1] * (self.fan_in(l) + (1 if self.bias else 0))
        return total


class ParamVector:
    """Flat parameter vector with named per-layer views (views alias the flat
    storage; round-tripping is the identity)."""

    def __init__(self, structure: NetworkStructure, flat=None):
        self.structure = structure
        n = structure.param_count
        if flat is None:
            flat = np.zeros(n)
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != (n,):
            raise NetworkError(f"expected {n} parameters, got {flat.shape}")
        self.flat = flat
        self._index()

    def _index(self):
        s = self.structure
        L = s.depth
        pos = 0
        out_n = s.widths[L - 2] if L >= 2 else s.d
        self._a = slice(pos, pos + out_n)
        pos += out_n
        if s.bias:
            self._b = pos
            pos += 1
        else:
            self._b = None
        self._w: dict[int, tuple[slice, tuple[int, int]]] = {}
        self._bv: dict[int, slice] = {}
        for l in range(L - 1, 0, -1):  # theta^(L-1) .. theta^(1)
            m, fan = s.widths[l - 1], s.fan_in(l)
            self._w[l] = (slice(pos, pos + m * fan), (m, fan))
            pos += m * fan
            if s.bias:
                self._bv[l] = slice(pos, pos + m)
                pos += m
        assert pos == s.param_count

    @property
    def out_weights(self) -> np.ndarray:
        return self.flat[self._a]

    @property
    def out_bias(self) -> float:
        return float(self.flat[self._b]) if self._b is not None else 0.0

    def weight(self, layer: int) -> np.ndarray:
        sl, shape = self._w[layer]
        return self.flat[sl].reshape(shape)

    def bias_vec(self, layer: int) -> np.ndarray:
        if self.structure.bias:
            return self.flat[self._bv[layer]]
        return np.zeros(self.structure.widths[layer - 1])

    def set_weight(self, layer: int, W) -> "ParamVector":
        sl, shape = self._w[layer]
        self.flat[sl] = np.asarray(W, dtype=float).reshape(-1)
        return self

    def set_bias_vec(self, layer: int, b) -> "ParamVector":
        if not self.structure.bias:
            raise NetworkError("no-bias network")
        self.flat[self._bv[layer]] = np.asarray(b, dtype=float)
        return self

    def set_out(self, a, b: float = 0.0) -> "ParamVector":
        self.flat[self._a] = np.asarray(a, dtype=float)
        if self._b is not None:
            self.flat[self._b] = float(b)
        return self

    def copy(self) -> "ParamVector":
        return ParamVector(self.structure, self.flat.copy())


@dataclass
class ForwardResult:
    value: np.ndarray            # (n,) network outputs
    layers: list                 # H^(0) .. H^(L-1), arrays of shape (n, m_l)
    flag: Optional[tuple] = None  # ("overflow", layer_index)

    @property
    def ok(self) -> bool:
        return self.flag is None


def forward_grid(structure: NetworkStructure, sigma: ScalarExpr, theta: ParamVector, xs) -> ForwardResult:
    """Evaluate the network on a batch of inputs; keeps every layer output."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim == 1:
        xs = xs[:, None] if structure.d == 1 else xs[None, :]
    if xs.shape[1] != structure.d:
        raise NetworkError(f"input dimension mismatch: {xs.shape[1]} != {structure.d}")
    h = xs
    layers = [h]
    flag = None
    L = structure.depth
    with np.errstate(over="ignore", invalid="ignore"):
        for l in range(1, L):
            pre = h @ theta.weight(l).T + theta.bias_vec(l)
            h = eval_grid(sigma, pre.ravel()).reshape(pre.shape)
            layers.append(h)
            if flag is None and not np.all(np.isfinite(h)):
                flag = ("overflow", l)
        value = h @ theta.out_weights + theta.out_bias
    return ForwardResult(value, layers, flag)


def forward(structure: NetworkStructure, sigma: ScalarExpr, theta: ParamVector, x) -> ForwardResult:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = forward_grid(structure, sigma, theta, x[None, :])
    return out


# -- embedding principle -------------------------------------------------------

class EmbedError(NetworkError):
    pass


@dataclass
class EmbeddingMap:
    small: NetworkStructure
    big: NetworkStructure
    assignment: list       # per hidden layer: big neuron -> small neuron
    split: list            # per hidden layer: coefficients, fiber sums = 1
    matrix: np.ndarray = field(default=None, repr=False)

    def apply(self, theta_small: ParamVector) -> ParamVector:
        return _embed_apply(self, theta_small)


def _embed_apply(emb: EmbeddingMap, theta_s: ParamVector) -> ParamVector:
    small, big = emb.small, emb.big
    out = ParamVector(big)
    L = big.depth
    for l in range(1, L):
        s_l = emb.assignment[l - 1]
        Ws = theta_s.weight(l)
        m_big, fan_big = big.widths[l - 1], big.fan_in(l)
        W = np.empty((m_big, fan_big))
        if l == 1:
            for k in range(m_big):
                W[k, :] = Ws[s_l[k], :]
        else:
            s_prev = emb.assignment[l - 2]
            alpha_prev = emb.split[l - 2]
            for k in range(m_big):
                W[k, :] = alpha_prev * Ws[s_l[k], s_prev]
        out.set_weight(l, W)
        if big.bias:
            out.set_bias_vec(l, theta_s.bias_vec(l)[s_l])
    s_last = emb.assignment[L - 2]
    alpha_last = emb.split[L - 2]
    a = alpha_last * theta_s.out_weights[s_last]
    out.set_out(a, theta_s.out_bias)
    return out


def embed_params(
    small: NetworkStructure,
    big: NetworkStructure,
    assignment: Sequence[Sequence[int]],
    split: Sequence[Sequence[float]],
) -> EmbeddingMap:
    """Full-rank linear map phi with H_big(phi(theta'), x) = H_small(theta', x)
    for every activation.

    `assignment[l]` sends each big layer-(l+1) neuron to the small neuron it
    replicates (surjective); `split[l]` gives nonnegative coefficients summing
    to one over each fiber (they weight the duplicated outgoing connections).
    """
    if small.d != big.d or small.depth != big.depth or small.bias != big.bias:
        raise EmbedError("structures must share input dim, depth and bias flag")
    L = big.depth
    assignment = [np.asarray(a, dtype=int) for a in assignment]
    split = [np.asarray(s, dtype=float) for s in split]
    if len(assignment) != L - 1 or len(split) != L - 1:
        raise EmbedError(f"need assignment/split for {L - 1} hidden layers")
    for l in range(1, L):
        m_small, m_big = small.widths[l - 1], big.widths[l - 1]
        if m_small > m_big:
            raise EmbedError(f"layer {l}: small width exceeds big width")
        a = assignment[l - 1]
        if a.shape != (m_big,) or set(a.tolist()) != set(range(m_small)):
            raise EmbedError(f"layer {l}: assignment must map onto all {m_small} small neurons")
        s = split[l - 1]
        if s.shape != (m_big,) or np.any(s < 0):
            raise EmbedError(f"layer {l}: split coefficients must be nonnegative")
        for j in range(m_small):
            tot = float(np.sum(s[a == j]))
            if abs(tot - 1.0) > 1e-12:
                raise EmbedError(f"layer {l}: fiber of neuron {j} sums to {tot}, not 1")
    emb = EmbeddingMap(small, big, assignment, split)
    n_small = small.param_count
    mat = np.empty((big.param_count, n_small))
    basis = ParamVector(small)
    for j in range(n_small):
        basis.flat[:] = 0.0
        basis.flat[j] = 1.0
        mat[:, j] = _embed_apply(emb, basis).flat
    if np.linalg.matrix_rank(mat) != n_small:
        raise EmbedError("embedding matrix is rank deficient")
    emb.matrix = mat
    return emb


def random_embedding(small: NetworkStructure, big: NetworkStructure, rng) -> EmbeddingMap:
    """Random valid (assignment, split) pair between compatible structures."""
    L = big.depth
    assignment, split = [], []
    for l in range(1, L):
        m_small, m_big = small.widths[l - 1], big.widths[l - 1]
        a = np.concatenate([np.arange(m_small), rng.integers(0, m_small, m_big - m_small)])
        rng.shuffle(a)
        coeff = np.empty(m_big)
        for j in range(m_small):
            fiber = np.where(a == j)[0]
            u = rng.uniform(0.2, 1.0, fiber.size)
            coeff[fiber] = u / u.sum()
        assignment.append(a)
        split.append(coeff)
    return embed_params(small, big, assignment, split)


# -- leading order at the origin ----------------------------------------------

@dataclass
class LeadingOrder:
    order: Optional[int]
    coeff: Optional[float]
    zero_to_order: Optional[int] = None

    @property
    def found(self) -> bool:
        return self.order is not None


def _richardson_derivative(f: Callable[[float], float], s: int, h0: float = 1e-2) -> float:
    """Central-difference derivative of order s with one Richardson step."""
    from math import comb

    def stencil(h):
        return sum((-1) ** k * comb(s, k) * f((s / 2 - k) * h) for k in range(s + 1)) / h**s

    d1, d2 = stencil(h0), stencil(h0 / 2.0)
    return (4.0 * d2 - d1) / 3.0


def leading_order_at_zero(
    f: Union[ScalarExpr, Callable[[float], float]],
    s_max: int = 12,
    tol: float = 1e-9,
) -> LeadingOrder:
    """Smallest s <= s_max with f(x) ~ c_s x^s near 0 (c_s = f^(s)(0)/s!).

    Symbolic derivatives when f is an expression; Richardson differences for
    plain callables (or when the derivative trees explode)."""
    if isinstance(f, ScalarExpr):
        try:
            d = f
            for s in range(s_max + 1):
                v = eval_expr(d, 0.0)
                if isinstance(v, EvalFlag):
                    raise NetworkError(f"derivative order {s} not finite at 0: {v.kind}")
                c = v / math.factorial(s)
                if abs(c) > tol:
                    return LeadingOrder(s, c)
                if s < s_max:
                    d = differentiate(d)
            return LeadingOrder(None, None, zero_to_order=s_max)
        except ExprTooLarge:
            f = _expr_as_callable(f)
    for s in range(s_max + 1):
        v = f(0.0) if s == 0 else _richardson_derivative(f, s)
        c = v / math.factorial(s)
        if abs(c) > tol:
            return LeadingOrder(s, c)
    return LeadingOrder(None, None, zero_to_order=s_max)


def _expr_as_callable(e: ScalarExpr):
    def call(x: float) -> float:
        v = eval_expr(e, x)
        if isinstance(v, EvalFlag):
            raise NetworkError(f"evaluation flag {v.kind} at x={x}")
        return v

    return call


def network_l2(
    structure: NetworkStructure,
    sigma: ScalarExpr,
    theta: ParamVector,
    interval=(0.0, 1.0),
    nodes: int = 64,
) -> float:
    """Quadrature of H(theta, x)^2 over the interval (scalar input only)."""
    if structure.d != 1:
        raise NetworkError("network_l2 expects scalar input")
    x, w = np.polynomial.legendre.leggauss(nodes)
    lo, hi = interval
    half = 0.5 * (hi - lo)
    xs = lo + half * (x + 1.0)
    out = forward_grid(structure, sigma, theta, xs)
    if not out.ok:
        raise NetworkError(f"overflow during L2 probe: {out.flag}")
    return float(np.sum(half * w * out.value**2))
