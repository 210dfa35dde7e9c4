"""Shared draw/sampling machinery for the test suite."""

import math

import numpy as np

from neuronlab.network import forward_grid, network_l2


def report(num, name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"[acceptance {num}] {name}: {status}{' ' + detail if detail else ''}")
    assert ok, f"criterion {num} ({name}) failed {detail}"


def sample_l2_on_subspace(sub, structure, rng, sigma, interval=(0.0, 1.0)):
    """L2 mass of a random network on the subspace; per-layer scaling keeps the
    point on the subspace while bounding the exp-tower activations, so
    float-level constraint residuals stay at the 1e-16 scale."""
    L = structure.depth
    scales = [0.8] * (L - 1) + [1.0]
    theta = sub.sample(rng, layer_scales=scales)
    xs = np.linspace(interval[0], interval[1], 65)
    for _ in range(60):
        out = forward_grid(structure, sigma, theta, xs)
        peak = max(float(np.max(np.abs(h))) for h in out.layers[1:]) if out.ok else math.inf
        if out.ok and peak < 30.0:
            return network_l2(structure, sigma, theta, interval=interval)
        for l in range(1, L):
            theta.set_weight(l, theta.weight(l) * 0.6)
    raise AssertionError("could not scale the sample into the moderate range")


def separated_rows(rng, m, lo, hi, sep, signed=True, with_bias=False, b_range=1.0,
                   reflect_sep=False):
    """Random parameter rows with pairwise (and optionally +-) separation."""
    while True:
        w = rng.uniform(lo, hi, m)
        if signed:
            w = w * rng.choice([-1.0, 1.0], m)
        if with_bias:
            b = rng.uniform(-b_range, b_range, m)
            P = np.column_stack([w, b])
        else:
            b = np.zeros(m)
            P = w[:, None]
        ok = True
        for i in range(m):
            for j in range(i + 1, m):
                if np.max(np.abs(P[i] - P[j])) < sep:
                    ok = False
                if reflect_sep and np.max(np.abs(P[i] + P[j])) < sep:
                    ok = False
        if ok:
            return (w, b) if with_bias else w
