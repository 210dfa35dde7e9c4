"""Benchmark: compiled evaluation kernel vs the pure-numpy fallback.

Usage: python benchmarks/bench_eval.py [--points 20000] [--repeat 5]
"""

import argparse
import time

import numpy as np

from neuronlab import activations
from neuronlab.blend import build_tanh_approx
from neuronlab.bump import BumpSpec, build_bump
from neuronlab.expr import compile_program, differentiate
from neuronlab import _kernel_py

try:
    from neuronlab import _kernel
except ImportError:
    _kernel = None


def cases():
    yield "exp-pair sigma", activations.exp_poly_pair(7, 3)
    yield "sigma'' (tanh-family)", differentiate(activations.TANH, 2)
    xi = build_bump(BumpSpec.tangent(activations.EXP_SQUARE, n=12))
    yield "bump xi (n=12)", xi
    yield "tanh approx (alpha=2)", build_tanh_approx(2.0).expr
    yield "third derivative of blend", differentiate(build_tanh_approx(2.0).expr, 1)


def run_python(prog, xs):
    return _kernel_py.run(prog.ops, prog.params, xs)


def run_cython(prog, xs):
    return _kernel.run(prog.ops, prog.params, xs, prog.stack_need, prog.frame_need)


def bench(fn, prog, xs, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(prog, xs)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    xs = np.linspace(-2.0, 2.0, args.points)
    print(f"{'case':36s} {'nodes':>7s} {'python':>10s} {'cython':>10s} {'speedup':>8s}")
    for name, expr in cases():
        prog = compile_program(expr)
        t_py = bench(run_python, prog, xs, args.repeat)
        if _kernel is not None:
            t_cy = bench(run_cython, prog, xs, args.repeat)
            agree = np.allclose(run_python(prog, xs), run_cython(prog, xs),
                                rtol=1e-12, equal_nan=True)
            flag = "" if agree else "  (MISMATCH!)"
            print(f"{name:36s} {expr.size:7d} {t_py*1e3:9.2f}ms {t_cy*1e3:9.2f}ms "
                  f"{t_py/t_cy:7.1f}x{flag}")
        else:
            print(f"{name:36s} {expr.size:7d} {t_py*1e3:9.2f}ms {'n/a':>10s}")


if __name__ == "__main__":
    main()
