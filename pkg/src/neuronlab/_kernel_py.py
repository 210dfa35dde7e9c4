"""Pure-numpy postfix VM; semantics mirror the compiled kernel exactly.

Overflow shows up as +-inf, domain violations as NaN.  Callers that need
tagged flags re-evaluate offending points through ``expr.eval_expr``.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit

BACKEND = "python"

(OP_CONST, OP_VAR, OP_ADD, OP_SUB, OP_MUL, OP_DIV, OP_NEG,
 OP_IPOW, OP_RPOW, OP_EXP, OP_LOG, OP_TANH, OP_SIGMOID,
 OP_PUSH_FRAME, OP_POP_FRAME) = range(15)


def run(ops: np.ndarray, params: np.ndarray, xs: np.ndarray) -> np.ndarray:
    stack: list[np.ndarray] = []
    frames: list[np.ndarray] = [xs]
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for op, p in zip(ops, params):
            if op == OP_CONST:
                stack.append(np.full_like(xs, p))
            elif op == OP_VAR:
                stack.append(frames[-1])
            elif op == OP_ADD:
                b = stack.pop()
                stack[-1] = stack[-1] + b
            elif op == OP_SUB:
                b = stack.pop()
                stack[-1] = stack[-1] - b
            elif op == OP_MUL:
                b = stack.pop()
                stack[-1] = stack[-1] * b
            elif op == OP_DIV:
                b = stack.pop()
                a = stack[-1]
                out = a / b
                out = np.where((a == 0.0) & (b == 0.0), np.nan, out)
                stack[-1] = out
            elif op == OP_NEG:
                stack[-1] = -stack[-1]
            elif op == OP_IPOW:
                n = int(p)
                v = stack[-1]
                out = v ** n
                if n < 0:
                    out = np.where(v == 0.0, np.nan, out)
                stack[-1] = out
            elif op == OP_RPOW:
                v = stack[-1]
                out = np.power(v, p)
                out = np.where(v < 0.0, np.nan, out)
                if p < 0:
                    out = np.where(v == 0.0, np.nan, out)
                stack[-1] = out
            elif op == OP_EXP:
                stack[-1] = np.exp(stack[-1])
            elif op == OP_LOG:
                v = stack[-1]
                stack[-1] = np.where(v > 0.0, np.log(np.where(v > 0.0, v, 1.0)), np.nan)
            elif op == OP_TANH:
                stack[-1] = np.tanh(stack[-1])
            elif op == OP_SIGMOID:
                stack[-1] = expit(stack[-1])
            elif op == OP_PUSH_FRAME:
                frames.append(stack.pop())
            elif op == OP_POP_FRAME:
                frames.pop()
            else:  # pragma: no cover
                raise ValueError(f"bad opcode {op}")
    assert len(stack) == 1
    return np.asarray(stack[0], dtype=np.float64)
