"""Activation-agnostic numeric linear-independence oracle and dimension reduction.

The oracle assembles a normalized Gram matrix by Gauss-Legendre quadrature
and thresholds its smallest singular value.  Conditioning, not truth, limits
it: verdicts are "numeric at tolerance", and functions of exp-tower size are
rescaled in log-domain before any inner product is formed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .expr import EvalFlag, ScalarExpr, eval_grid, eval_log_domain
from .util import parallel_map

DEFAULT_INTERVAL = (-2.0, 2.0)
DEFAULT_NODES = 201
DEFAULT_TOL = 1e-8


class IndepError(ValueError):
    pass


@dataclass
class IndependenceResult:
    independent: bool
    min_singular_value: float
    certificate: Optional[tuple] = None  # e.g. ("zero-function", i)

    def __bool__(self):
        return self.independent


Func = Union[ScalarExpr, Callable[[np.ndarray], np.ndarray]]


def _sample(f: Func, xs: np.ndarray) -> np.ndarray:
    if isinstance(f, ScalarExpr):
        return eval_grid(f, xs)
    return np.asarray(f(xs), dtype=np.float64)


def _log_resample(f: ScalarExpr, xs: np.ndarray) -> tuple[np.ndarray, float]:
    """(values scaled by exp(-max log|f|), the max log) via the log-domain path."""
    signs = np.empty_like(xs)
    logs = np.empty_like(xs)
    for i, x in enumerate(xs):
        out = eval_log_domain(f, float(x))
        if isinstance(out, EvalFlag):
            raise IndepError(f"function not evaluable in log-domain at x={x}: {out.kind}")
        signs[i] = out.sign
        logs[i] = out.log_abs
    peak = np.max(logs[np.isfinite(logs)], initial=-math.inf)
    if peak == -math.inf:
        return np.zeros_like(xs), -math.inf
    with np.errstate(under="ignore"):
        vals = signs * np.exp(logs - peak)
    return vals, peak


def gauss_legendre(interval: tuple[float, float], nodes: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(nodes)
    lo, hi = interval
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def numeric_independent(
    fns: Sequence[Func],
    interval: tuple[float, float] = DEFAULT_INTERVAL,
    nodes: int = DEFAULT_NODES,
    tol: float = DEFAULT_TOL,
) -> IndependenceResult:
    """Independent iff the normalized Gram matrix has smallest singular value > tol.

    Functions whose direct evaluation overflows the grid are rescaled in
    log-domain first, so the verdict is invariant under per-function scaling
    by factors as large as exp-towers allow.
    """
    if len(fns) == 0:
        raise IndepError("empty function family")
    xs, w = gauss_legendre(interval, nodes)

    def sampled(args):
        """Samples rescaled to unit peak; the scale itself is irrelevant to the
        normalized Gram, so exp-tower magnitudes are harmless."""
        i, f = args
        vals = _sample(f, xs)
        if not np.all(np.isfinite(vals)):
            if isinstance(f, ScalarExpr):
                vals, _ = _log_resample(f, xs)
            else:
                raise IndepError(f"function {i} not finite on the sample nodes")
        peak = float(np.max(np.abs(vals)))
        return vals / peak if peak > 0.0 else vals

    values = parallel_map(sampled, list(enumerate(fns)))
    norms = [math.sqrt(max(float(np.sum(w * v * v)), 0.0)) for v in values]
    for i, nv in enumerate(norms):
        if nv < tol * tol:
            return IndependenceResult(False, 0.0, ("zero-function", i))
    normalized = [v / nv for v, nv in zip(values, norms)]

    n = len(fns)
    gram = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            gram[i, j] = gram[j, i] = float(np.sum(w * normalized[i] * normalized[j]))
    smin = float(np.linalg.svd(gram, compute_uv=False)[-1])
    if smin > tol:
        return IndependenceResult(True, smin)
    return IndependenceResult(False, smin, ("min-singular-value", smin))


def dimension_reduce(weights, attempts: int = 32, seed: int = 0):
    """Unit vector v with pairwise-separated projections <w_i, v>.

    Guarantees |<w_i - w_j, v>| > delta_sep = min ||w_i - w_j|| / (4 sqrt(d));
    deterministic given the seed.  Keeps the best candidate over `attempts`
    random directions and errors out if none clears the bound.
    """
    W = np.atleast_2d(np.asarray(weights, dtype=float))
    m, d = W.shape
    if m < 2:
        return _first_unit(d)
    diffs = np.array([W[i] - W[j] for i in range(m) for j in range(i + 1, m)])
    dist = np.linalg.norm(diffs, axis=1)
    if np.min(dist) == 0.0:
        raise IndepError("weights are not pairwise distinct")
    delta_sep = float(np.min(dist)) / (4.0 * math.sqrt(d))
    rng = np.random.default_rng(seed)
    best_v, best_margin = None, -math.inf
    for _ in range(attempts):
        v = rng.standard_normal(d)
        v /= np.linalg.norm(v)
        margin = float(np.min(np.abs(diffs @ v)))
        if margin > best_margin:
            best_margin, best_v = margin, v
        if best_margin > delta_sep:
            break
    if best_margin <= delta_sep:
        raise IndepError(
            f"no direction with separation {delta_sep:.3e} in {attempts} attempts "
            f"(best {best_margin:.3e}); weights may be near-duplicate"
        )
    return best_v


def _first_unit(d):
    v = np.zeros(d)
    v[0] = 1.0
    return v
