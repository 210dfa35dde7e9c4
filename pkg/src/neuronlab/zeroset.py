"""Minimal zero set membership, two/three-layer predictors, and the no-bias
zero-subspace enumeration.

The membership test implements the defining conditions literally: detect the
constant inner components, test the last-hidden-layer parameters against the
distinctness/zero-block requirements, group equal neurons on a probe grid,
and check the per-group zero sums plus the constant-block cancellation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .expr import ScalarExpr
from .network import NetworkStructure, ParamVector, forward_grid

DEFAULT_TOL = 1e-9
DEFAULT_PROBE = (-2.0, 2.0, 64)


class ZeroSetError(ValueError):
    pass


class InconclusiveGrouping(ZeroSetError):
    """Probe grid too coarse to separate two near-equal neurons."""


@dataclass
class GroupingPattern:
    """Partition of neuron indices into equal-function blocks plus constants."""

    blocks: list            # lists of neuron indices, non-constant, equal within
    const_block: list       # indices whose function is constant on the probe
    order: list = field(default_factory=list)       # permutation: blocks then constants
    breakpoints: list = field(default_factory=list)  # 0 = n_0 < n_1 < ... < n_r

    def __post_init__(self):
        if not self.order:
            self.order = [i for blk in self.blocks for i in blk] + list(self.const_block)
            ns = [0]
            for blk in self.blocks:
                ns.append(ns[-1] + len(blk))
            self.breakpoints = ns

    @property
    def r(self) -> int:
        return len(self.blocks)


def group_functions(values: np.ndarray, refined: np.ndarray, tol: float = DEFAULT_TOL) -> GroupingPattern:
    """Group rows of `values` ((m, n) samples) by numerical equality.

    `refined` holds the same functions on a ~4x finer grid; a pair that ties
    on the coarse grid but separates on the refined one raises
    InconclusiveGrouping.
    """
    m = values.shape[0]
    scale = max(1.0, float(np.max(np.abs(values))))

    def equal(i, j):
        coarse = float(np.max(np.abs(values[i] - values[j])))
        if coarse > tol * scale:
            return False
        fine = float(np.max(np.abs(refined[i] - refined[j])))
        if fine > tol * max(1.0, float(np.max(np.abs(refined)))):
            raise InconclusiveGrouping(
                f"neurons {i} and {j} agree on the probe grid but separate at refinement"
            )
        return True

    def constant(i):
        dev = float(np.ptp(values[i]))
        if dev > tol * scale:
            return False
        if float(np.ptp(refined[i])) > tol * max(1.0, float(np.max(np.abs(refined)))):
            raise InconclusiveGrouping(f"neuron {i} looks constant only at probe resolution")
        return True

    const_block = [i for i in range(m) if constant(i)]
    rest = [i for i in range(m) if i not in const_block]
    blocks: list[list[int]] = []
    for i in rest:
        for blk in blocks:
            if equal(i, blk[0]):
                blk.append(i)
                break
        else:
            blocks.append([i])
    return GroupingPattern(blocks, const_block)


@dataclass
class ZeroSetMembership:
    in_zero_set: bool
    certificate: tuple
    grouping: Optional[GroupingPattern] = None

    def __bool__(self):
        return self.in_zero_set


def in_minimal_zero_set(
    structure: NetworkStructure,
    sigma: ScalarExpr,
    theta: ParamVector,
    tol: float = DEFAULT_TOL,
    probe: tuple = DEFAULT_PROBE,
) -> ZeroSetMembership:
    """Decide membership in the minimal zero set on a probe grid.

    Conditions: (b) the last-hidden-layer parameters are degenerate (or every
    deeper component is constant), and (c) equal-neuron groups have zero
    output-weight sums and the constant part cancels (against the output bias
    for bias networks, to zero otherwise).
    """
    lo, hi, n = probe
    if n < 64:
        raise ZeroSetError("probe grid must have at least 64 points")
    xs = np.linspace(lo, hi, int(n))
    xs_fine = np.linspace(lo, hi, 4 * int(n))
    if structure.d != 1:
        raise ZeroSetError("membership probe works on scalar-input networks")
    L = structure.depth
    out = forward_grid(structure, sigma, theta, xs)
    out_f = forward_grid(structure, sigma, theta, xs_fine)
    if not out.ok or not out_f.ok:
        raise ZeroSetError(f"activation overflow on probe grid: {out.flag or out_f.flag}")

    # constant components of the (L-2)-nd layer
    inner = out.layers[L - 2]
    inner_f = out_f.layers[L - 2]
    scale_in = max(1.0, float(np.max(np.abs(inner))))
    const_mask = np.ptp(inner, axis=0) <= tol * scale_in
    all_const = bool(np.all(const_mask))
    const_vals = inner[0]

    W = theta.weight(L - 1)
    b_vec = theta.bias_vec(L - 1)
    m_last = structure.widths[L - 2]

    # extended parameter vectors: live weights plus the absorbed constant part
    live = ~const_mask
    ext = np.column_stack([W[:, live], (W[:, const_mask] @ const_vals[const_mask]) + b_vec])
    ext_scale = max(1.0, float(np.max(np.abs(ext))))
    distinct = all(
        float(np.max(np.abs(ext[i] - ext[j]))) > tol * ext_scale
        for i in range(m_last) for j in range(i + 1, m_last)
    )
    zero_blocks = [j for j in range(m_last) if float(np.max(np.abs(W[j, live]), initial=0.0)) <= tol * ext_scale]
    neuron_vals = out.layers[L - 1].T  # (m_last, n)
    zero_block_ok = len(zero_blocks) <= 1
    if zero_block_ok and len(zero_blocks) == 1:
        j = zero_blocks[0]
        zero_block_ok = float(np.max(np.abs(neuron_vals[j]))) > tol
    thm1_satisfied = distinct and zero_block_ok
    cond_b = all_const or not thm1_satisfied

    grouping = group_functions(neuron_vals, out_f.layers[L - 1].T, tol)
    a = theta.out_weights
    a_scale = max(1.0, float(np.max(np.abs(a), initial=0.0)))
    bad_group = next(
        (blk for blk in grouping.blocks if abs(float(np.sum(a[blk]))) > tol * a_scale), None
    )
    const_resid = float(np.sum(a[grouping.const_block] * neuron_vals[grouping.const_block, 0]))
    const_resid += theta.out_bias
    cond_c = bad_group is None and abs(const_resid) <= tol * a_scale

    if cond_b and cond_c:
        if not distinct:
            cert = ("duplicate-pair", _first_collision(ext, tol * ext_scale))
        elif len(zero_blocks) >= 2:
            cert = ("zero-weight-pair", tuple(zero_blocks[:2]))
        elif all_const:
            cert = ("all-inner-constant",)
        else:
            cert = ("degenerate-last-layer",)
        return ZeroSetMembership(True, cert + (("zero-sum-groups", len(grouping.blocks)),), grouping)
    if not cond_c:
        if bad_group is not None:
            return ZeroSetMembership(False, ("nonzero-group-sum", tuple(bad_group)), grouping)
        return ZeroSetMembership(False, ("constant-block-residual", const_resid), grouping)
    return ZeroSetMembership(False, ("last-layer-nondegenerate",), grouping)


def _first_collision(vectors: np.ndarray, atol: float) -> tuple:
    m = vectors.shape[0]
    for i in range(m):
        for j in range(i + 1, m):
            if float(np.max(np.abs(vectors[i] - vectors[j]))) <= atol:
                return (i, j)
    return ()


# -- combinatorial predictors ---------------------------------------------------

@dataclass
class IndependenceVerdict:
    predicted: bool
    certificate: Optional[tuple] = None
    oracle: Optional[bool] = None  # None = oracle skipped
    min_singular_value: Optional[float] = None
    criterion: str = ""

    def __bool__(self):
        return self.predicted

    @property
    def agrees(self) -> Optional[bool]:
        return None if self.oracle is None else self.oracle == self.predicted


def attach_oracle(verdict: IndependenceVerdict, fns, **oracle_kwargs) -> IndependenceVerdict:
    """Run the numeric oracle on the realized function family and record the
    outcome on the verdict."""
    from .indep import numeric_independent

    out = numeric_independent(fns, **oracle_kwargs)
    verdict.oracle = out.independent
    verdict.min_singular_value = out.min_singular_value
    if not out.independent and verdict.certificate is None:
        verdict.certificate = out.certificate
    return verdict


def _pairs(m):
    return itertools.combinations(range(m), 2)


def predict_two_layer(kind: str, ws, bs=None, tol: float = 1e-12) -> IndependenceVerdict:
    """Two-layer independence predictors.

    nobias-generic: independent iff the weights are pairwise distinct.
    biasA: independent iff the (w, b) pairs are pairwise distinct.
    biasB: independent if (w_k, b_k) +- (w_j, b_j) != 0 pairwise (sufficient;
           it is also necessary for even bases, where a collision is an exact
           duplicate).
    biasC: stated for the derivative-level family sigma^(s)(w z + b) with
           sigma^(s) even, nonvanishing and Schwartz: independent iff
           (w_k, b_k) +- (w_j, b_j) != 0 pairwise and at most one w_k = 0.
    """
    W = np.asarray(ws, dtype=float)
    if W.ndim == 1:
        W = W[:, None]
    m = W.shape[0]
    if m == 0:
        raise ZeroSetError("empty neuron family")
    if kind == "nobias-generic":
        for i, j in _pairs(m):
            if np.max(np.abs(W[i] - W[j])) <= tol:
                return IndependenceVerdict(False, ("duplicate-pair", (i, j)), criterion=kind)
        return IndependenceVerdict(True, criterion=kind)
    if bs is None:
        raise ZeroSetError(f"kind {kind} requires biases")
    b = np.asarray(bs, dtype=float)
    P = np.column_stack([W, b])
    if kind == "biasA":
        for i, j in _pairs(m):
            if np.max(np.abs(P[i] - P[j])) <= tol:
                return IndependenceVerdict(False, ("duplicate-pair", (i, j)), criterion=kind)
        return IndependenceVerdict(True, criterion=kind)
    if kind in ("biasB", "biasC"):
        for i, j in _pairs(m):
            if np.max(np.abs(P[i] - P[j])) <= tol or np.max(np.abs(P[i] + P[j])) <= tol:
                return IndependenceVerdict(False, ("reduced-vector-collision", (i, j)), criterion=kind)
        if kind == "biasC":
            zero_w = [k for k in range(m) if np.max(np.abs(W[k]), initial=0.0) <= tol]
            if len(zero_w) > 1:
                return IndependenceVerdict(False, ("zero-weight-pair", tuple(zero_w[:2])), criterion=kind)
        return IndependenceVerdict(True, criterion=kind)
    raise ZeroSetError(f"unknown two-layer kind {kind!r}")


def predict_three_layer_tanh(W1, W2, tol: float = 1e-12) -> IndependenceVerdict:
    """Three-layer no-bias tanh criterion via sign-reduced vectors.

    First-layer rows are merged when w_{k'} = +-w_k exactly; each group
    contributes one coordinate sum_{k' in group} Sgn(w_{k'}/w_k) w^{(2)}_{j k'}.
    Independence holds iff every reduced vector is nonzero and no two of them
    collide up to sign.
    """
    W1 = np.asarray(W1, dtype=float)
    if W1.ndim == 1:
        W1 = W1[:, None]
    W2 = np.atleast_2d(np.asarray(W2, dtype=float))
    m = W2.shape[1]
    if W1.shape[0] != m:
        raise ZeroSetError("W2 column count must match the number of first-layer rows")
    scale = max(1.0, float(np.max(np.abs(W1))))
    zero_rows = [k for k in range(m) if np.max(np.abs(W1[k])) <= tol * scale]
    reps: list[int] = []
    signs = np.zeros(m)
    group_of = {}
    for k in range(m):
        if k in zero_rows:
            continue
        for rep in reps:
            if np.max(np.abs(W1[k] - W1[rep])) <= tol * scale:
                group_of[k] = rep
                signs[k] = 1.0
                break
            if np.max(np.abs(W1[k] + W1[rep])) <= tol * scale:
                group_of[k] = rep
                signs[k] = -1.0
                break
        else:
            reps.append(k)
            group_of[k] = k
            signs[k] = 1.0
    n = W2.shape[0]
    U = np.zeros((n, len(reps)))
    for t, rep in enumerate(reps):
        members = [k for k in group_of if group_of[k] == rep]
        for j in range(n):
            U[j, t] = float(np.sum(signs[members] * W2[j, members]))
    u_scale = max(1.0, float(np.max(np.abs(U), initial=0.0)))
    for j in range(n):
        if len(reps) == 0 or np.max(np.abs(U[j]), initial=0.0) <= tol * u_scale:
            return IndependenceVerdict(False, ("zero-reduced-vector", j), criterion="three-layer-tanh")
    for j1, j2 in _pairs(n):
        if np.max(np.abs(U[j1] - U[j2])) <= tol * u_scale:
            return IndependenceVerdict(False, ("reduced-vector-collision", (j1, j2, +1)), criterion="three-layer-tanh")
        if np.max(np.abs(U[j1] + U[j2])) <= tol * u_scale:
            return IndependenceVerdict(False, ("reduced-vector-collision", (j1, j2, -1)), criterion="three-layer-tanh")
    return IndependenceVerdict(True, criterion="three-layer-tanh")


# -- zero-subspace enumeration (no-bias, sigma(0) = 0) ---------------------------

@dataclass
class ZeroSubspace:
    structure: NetworkStructure
    constraints: np.ndarray  # rows: linear functionals vanishing on the subspace
    description: str

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.constraints, dtype=float))
        u, s, vt = np.linalg.svd(A) if A.size else (None, np.array([]), None)
        rank = int(np.sum(s > 1e-12)) if A.size else 0
        self._rows = vt[:rank] if rank else np.zeros((0, self.structure.param_count))

    def distance(self, theta_flat) -> float:
        theta_flat = np.asarray(theta_flat, dtype=float)
        if self._rows.shape[0] == 0:
            return 0.0
        return float(np.linalg.norm(self._rows @ theta_flat))

    def contains(self, theta_flat, tol: float = 1e-10) -> bool:
        return self.distance(theta_flat) <= tol * max(1.0, float(np.linalg.norm(theta_flat)))

    def sample(self, rng, layer_scales: Optional[Sequence[float]] = None) -> ParamVector:
        """Random point on the subspace; per-layer rescaling preserves
        membership because every constraint touches a single layer."""
        n = self.structure.param_count
        z = rng.standard_normal(n)
        if self._rows.shape[0]:
            z = z - self._rows.T @ (self._rows @ z)
        theta = ParamVector(self.structure, z)
        if layer_scales is not None:
            L = self.structure.depth
            for l in range(1, L):
                theta.set_weight(l, theta.weight(l) * layer_scales[l - 1])
            theta.set_out(theta.out_weights * layer_scales[L - 1])
        return theta


def _partitions_with_zero(indices: Sequence[int]):
    """(blocks, zero_set) decompositions of the index set."""
    indices = list(indices)
    for zero_mask in itertools.product([False, True], repeat=len(indices)):
        zero_set = [i for i, z in zip(indices, zero_mask) if z]
        rest = [i for i, z in zip(indices, zero_mask) if not z]
        for blocks in _set_partitions(rest):
            yield blocks, zero_set


def _set_partitions(items: list):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for sub in _set_partitions(rest):
        for i in range(len(sub)):
            yield sub[:i] + [[first] + sub[i]] + sub[i + 1:]
        yield [[first]] + sub


MAX_ENUM_WIDTH = 3
MAX_ENUM_DEPTH = 3


def enumerate_zero_subspaces(structure: NetworkStructure) -> list[ZeroSubspace]:
    """All zero subspaces of a small no-bias network with sigma(0) = 0.

    Walks the grouping patterns layer by layer: repeated-weight groups and
    zero combined-weight neurons at each hidden layer, then zero output sums
    over the surviving groups.  Every emitted set is a linear subspace of the
    flat parameter space.
    """
    if structure.bias:
        raise ZeroSetError("enumeration applies to no-bias networks")
    if structure.depth > MAX_ENUM_DEPTH or any(m > MAX_ENUM_WIDTH for m in structure.hidden_widths):
        raise ZeroSetError("structure too large for exhaustive enumeration")
    L = structure.depth
    out: list[ZeroSubspace] = []
    scratch = ParamVector(structure)

    def row(fill) -> np.ndarray:
        scratch.flat[:] = 0.0
        fill(scratch)
        return scratch.flat.copy()

    def recurse(layer: int, groups: list, rows: list, desc: list):
        # groups: index sets of the previous layer's equal nonzero neurons
        if layer == L:
            for blk in groups:
                rows.append(row(lambda pv, blk=blk: _bump_out(pv, blk)))
            out.append(ZeroSubspace(structure, np.array(rows) if rows else np.zeros((0, structure.param_count)),
                                    " & ".join(desc) or "trivial"))
            for blk in groups:
                rows.pop()
            return
        m_l = structure.widths[layer - 1]
        fan = structure.fan_in(layer)
        for blocks, zero_set in _partitions_with_zero(range(m_l)):
            added = 0
            if layer == 1:
                for blk in blocks:
                    lead = blk[0]
                    for other in blk[1:]:
                        for c in range(fan):
                            rows.append(row(lambda pv, a=lead, bb=other, c=c: _diff_w(pv, layer, a, bb, [c], [1.0])))
                            added += 1
                for j in zero_set:
                    for c in range(fan):
                        rows.append(row(lambda pv, j=j, c=c: _set_w(pv, layer, j, [c], [1.0])))
                        added += 1
            else:
                for blk in blocks:
                    lead = blk[0]
                    for other in blk[1:]:
                        for grp in groups:
                            rows.append(row(lambda pv, a=lead, bb=other, g=grp: _diff_w(pv, layer, a, bb, g, None)))
                            added += 1
                for j in zero_set:
                    for grp in groups:
                        rows.append(row(lambda pv, j=j, g=grp: _set_w(pv, layer, j, g, None)))
                        added += 1
            d = f"L{layer}:groups={blocks},zero={zero_set}"
            if not blocks:
                # every neuron of this layer is identically zero; deeper layers
                # vanish regardless of their parameters
                out.append(ZeroSubspace(structure, np.array(rows) if rows else np.zeros((0, structure.param_count)),
                                        " & ".join(desc + [d])))
            else:
                recurse(layer + 1, blocks, rows, desc + [d])
            for _ in range(added):
                rows.pop()

    def _diff_w(pv, layer, j1, j2, cols, coefs):
        w = pv.weight(layer)
        coefs = coefs or [1.0] * len(cols)
        for c, q in zip(cols, coefs):
            w[j1, c] += q
            w[j2, c] -= q

    def _set_w(pv, layer, j, cols, coefs):
        w = pv.weight(layer)
        coefs = coefs or [1.0] * len(cols)
        for c, q in zip(cols, coefs):
            w[j, c] += q

    def _bump_out(pv, blk):
        a = pv.out_weights
        for j in blk:
            a[j] += 1.0

    recurse(1, [], [], [])
    return out
