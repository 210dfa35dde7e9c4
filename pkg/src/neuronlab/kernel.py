"""Kernel selection: compiled Cython VM when available, numpy fallback otherwise.

The compiled VM wins ~3x on quadrature-sized grids (a few hundred points),
where numpy's per-op dispatch and temporaries dominate; numpy's SIMD
transcendentals win on large grids.  Dispatch is by array size, measured by
benchmarks/bench_eval.py.  Set NEURONLAB_PURE=1 to force the fallback.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernel_py

_impl = None
if os.environ.get("NEURONLAB_PURE", "") != "1":
    try:
        from . import _kernel as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = None

# crossover between the scalar-loop compiled VM and numpy's SIMD ufuncs
SMALL_GRID = int(os.environ.get("NEURONLAB_KERNEL_CUTOFF", "600"))


def backend_name() -> str:
    return "cython" if _impl is not None else "python"


def run(program, xs: np.ndarray) -> np.ndarray:
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    shape = xs.shape
    flat = xs.ravel()
    if _impl is not None and flat.size <= SMALL_GRID:
        out = _impl.run(program.ops, program.params, flat,
                        program.stack_need, program.frame_need)
    else:
        out = _kernel_py.run(program.ops, program.params, flat)
    return out.reshape(shape)
