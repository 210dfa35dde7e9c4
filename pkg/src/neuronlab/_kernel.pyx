# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled postfix VM for expression-grid evaluation.

Same opcode set and IEEE semantics as _kernel_py (inf = overflow, nan =
domain violation).  Each opcode runs one tight C loop over the whole input
array: dispatch cost is per-op, not per-point, and no temporaries are
allocated, which is where the numpy fallback loses time.
"""

import numpy as np

from libc.math cimport exp, log, tanh, pow, isnan, NAN

BACKEND = "cython"

cdef enum:
    OP_CONST, OP_VAR, OP_ADD, OP_SUB, OP_MUL, OP_DIV, OP_NEG
    OP_IPOW, OP_RPOW, OP_EXP, OP_LOG, OP_TANH, OP_SIGMOID
    OP_PUSH_FRAME, OP_POP_FRAME


cdef inline double _sigmoid(double z) nogil:
    cdef double w
    if z >= 0.0:
        return 1.0 / (1.0 + exp(-z))
    w = exp(z)
    return w / (1.0 + w)


def run(int[:] ops, double[:] params, double[:] xs,
        int stack_need, int frame_need):
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t n_ops = ops.shape[0]
    stack_arr = np.empty((stack_need, n), dtype=np.float64)
    frame_arr = np.empty((frame_need + 1, n), dtype=np.float64)
    cdef double[:, ::1] stack = stack_arr
    cdef double[:, ::1] frames = frame_arr
    cdef Py_ssize_t i, j
    cdef int sp = 0, fp = 0, op
    cdef double p, a, b

    with nogil:
        for i in range(n):
            frames[0, i] = xs[i]
        for j in range(n_ops):
            op = ops[j]
            p = params[j]
            if op == OP_CONST:
                for i in range(n):
                    stack[sp, i] = p
                sp += 1
            elif op == OP_VAR:
                for i in range(n):
                    stack[sp, i] = frames[fp, i]
                sp += 1
            elif op == OP_ADD:
                sp -= 1
                for i in range(n):
                    stack[sp - 1, i] = stack[sp - 1, i] + stack[sp, i]
            elif op == OP_SUB:
                sp -= 1
                for i in range(n):
                    stack[sp - 1, i] = stack[sp - 1, i] - stack[sp, i]
            elif op == OP_MUL:
                sp -= 1
                for i in range(n):
                    stack[sp - 1, i] = stack[sp - 1, i] * stack[sp, i]
            elif op == OP_DIV:
                sp -= 1
                for i in range(n):
                    a = stack[sp - 1, i]
                    b = stack[sp, i]
                    if b == 0.0 and a == 0.0:
                        stack[sp - 1, i] = NAN
                    else:
                        stack[sp - 1, i] = a / b
            elif op == OP_NEG:
                for i in range(n):
                    stack[sp - 1, i] = -stack[sp - 1, i]
            elif op == OP_IPOW:
                for i in range(n):
                    a = stack[sp - 1, i]
                    if a == 0.0 and p < 0.0:
                        stack[sp - 1, i] = NAN
                    else:
                        stack[sp - 1, i] = pow(a, p)
            elif op == OP_RPOW:
                for i in range(n):
                    a = stack[sp - 1, i]
                    if a < 0.0 or (a == 0.0 and p < 0.0):
                        stack[sp - 1, i] = NAN
                    else:
                        stack[sp - 1, i] = pow(a, p)
            elif op == OP_EXP:
                for i in range(n):
                    stack[sp - 1, i] = exp(stack[sp - 1, i])
            elif op == OP_LOG:
                for i in range(n):
                    a = stack[sp - 1, i]
                    if a > 0.0 or isnan(a):
                        stack[sp - 1, i] = log(a)
                    else:
                        stack[sp - 1, i] = NAN
            elif op == OP_TANH:
                for i in range(n):
                    stack[sp - 1, i] = tanh(stack[sp - 1, i])
            elif op == OP_SIGMOID:
                for i in range(n):
                    stack[sp - 1, i] = _sigmoid(stack[sp - 1, i])
            elif op == OP_PUSH_FRAME:
                fp += 1
                sp -= 1
                for i in range(n):
                    frames[fp, i] = stack[sp, i]
            else:  # OP_POP_FRAME
                fp -= 1
    return stack_arr[0]
