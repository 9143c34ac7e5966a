"""Minimal reverse-mode automatic differentiation over numpy arrays.

Supports exactly the graph the training objective needs: embedding
lookups, affine maps, a gated recurrent cell, softmax/log-softmax,
means and norms. Shapes are scalars, vectors, and matrices; the only
broadcasting allowed is scalar-with-array.
"""
from __future__ import annotations

import numpy as np


class Tensor:
    __slots__ = ("value", "grad", "parents", "grad_fns", "requires_grad")

    def __init__(self, value, parents=(), grad_fns=(), requires_grad=False):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = None
        self.parents = parents
        self.grad_fns = grad_fns
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)

    # Operator sugar for readability; all logic lives in module functions.
    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __neg__(self):
        return scale(self, -1.0)

    def item(self) -> float:
        return float(self.value)


def const(value) -> Tensor:
    return Tensor(value)


def param(value) -> Tensor:
    return Tensor(value, requires_grad=True)


def detach(t: Tensor) -> Tensor:
    return Tensor(t.value)


def _unbroadcast(grad, shape):
    """Reduce a gradient back to `shape` after scalar broadcasting."""
    if grad.shape == tuple(shape):
        return grad
    if shape == ():
        return np.sum(grad)
    raise ValueError(f"cannot reduce grad of shape {grad.shape} to {shape}")


def add(a: Tensor, b: Tensor) -> Tensor:
    return Tensor(
        a.value + b.value,
        parents=(a, b),
        grad_fns=(
            lambda g: _unbroadcast(g, a.value.shape),
            lambda g: _unbroadcast(g, b.value.shape),
        ),
    )


def sub(a: Tensor, b: Tensor) -> Tensor:
    return Tensor(
        a.value - b.value,
        parents=(a, b),
        grad_fns=(
            lambda g: _unbroadcast(g, a.value.shape),
            lambda g: _unbroadcast(-g, b.value.shape),
        ),
    )


def mul(a: Tensor, b: Tensor) -> Tensor:
    return Tensor(
        a.value * b.value,
        parents=(a, b),
        grad_fns=(
            lambda g: _unbroadcast(g * b.value, a.value.shape),
            lambda g: _unbroadcast(g * a.value, b.value.shape),
        ),
    )


def scale(a: Tensor, c: float) -> Tensor:
    return Tensor(a.value * c, parents=(a,), grad_fns=(lambda g: g * c,))


def matvec(m: Tensor, v: Tensor) -> Tensor:
    """(r, c) matrix times (c,) vector."""
    return Tensor(
        m.value @ v.value,
        parents=(m, v),
        grad_fns=(lambda g: np.outer(g, v.value), lambda g: m.value.T @ g),
    )


def dot(a: Tensor, b: Tensor) -> Tensor:
    return Tensor(
        a.value @ b.value,
        parents=(a, b),
        grad_fns=(lambda g: g * b.value, lambda g: g * a.value),
    )


def concat(a: Tensor, b: Tensor) -> Tensor:
    na = a.value.shape[0]
    return Tensor(
        np.concatenate([a.value, b.value]),
        parents=(a, b),
        grad_fns=(lambda g: g[:na], lambda g: g[na:]),
    )


def gather_rows(m: Tensor, ids) -> Tensor:
    ids = np.asarray(ids, dtype=np.intp)

    def grad_m(g):
        out = np.zeros_like(m.value)
        np.add.at(out, ids, g)
        return out

    return Tensor(m.value[ids], parents=(m,), grad_fns=(grad_m,))


def row(m: Tensor, i: int) -> Tensor:
    def grad_m(g):
        out = np.zeros_like(m.value)
        out[i] = g
        return out

    return Tensor(m.value[i], parents=(m,), grad_fns=(grad_m,))


def element(v: Tensor, i: int) -> Tensor:
    def grad_v(g):
        out = np.zeros_like(v.value)
        out[i] = g
        return out

    return Tensor(v.value[i], parents=(v,), grad_fns=(grad_v,))


def mean_rows(m: Tensor) -> Tensor:
    """Mean over axis 0 of a (k, n) matrix."""
    k = m.value.shape[0]
    return Tensor(
        m.value.mean(axis=0),
        parents=(m,),
        grad_fns=(lambda g: np.tile(g / k, (k, 1)),),
    )


def sum_all(t: Tensor) -> Tensor:
    return Tensor(np.sum(t.value), parents=(t,), grad_fns=(lambda g: g * np.ones_like(t.value),))


def tanh(t: Tensor) -> Tensor:
    out = np.tanh(t.value)
    return Tensor(out, parents=(t,), grad_fns=(lambda g: g * (1.0 - out * out),))


def sigmoid(t: Tensor) -> Tensor:
    out = 1.0 / (1.0 + np.exp(-t.value))
    return Tensor(out, parents=(t,), grad_fns=(lambda g: g * out * (1.0 - out),))


def exp(t: Tensor) -> Tensor:
    out = np.exp(t.value)
    return Tensor(out, parents=(t,), grad_fns=(lambda g: g * out,))


def log(t: Tensor) -> Tensor:
    return Tensor(np.log(t.value), parents=(t,), grad_fns=(lambda g: g / t.value,))


def sqrt(t: Tensor) -> Tensor:
    out = np.sqrt(t.value)
    return Tensor(out, parents=(t,), grad_fns=(lambda g: g / (2.0 * out),))


def reciprocal(t: Tensor) -> Tensor:
    out = 1.0 / t.value
    return Tensor(out, parents=(t,), grad_fns=(lambda g: -g * out * out,))


def l2_normalize(v: Tensor) -> Tensor:
    norm = sqrt(dot(v, v))
    return mul(v, reciprocal(norm))


def log_softmax(logits: Tensor) -> Tensor:
    # Max-subtraction for stability; the shift is a constant and cancels
    # analytically, so treating it as non-differentiable is exact.
    shifted = sub(logits, const(np.max(logits.value)))
    lse = log(sum_all(exp(shifted)))
    return sub(shifted, lse)


def softmax(logits: Tensor) -> Tensor:
    return exp(log_softmax(logits))


def backward(loss: Tensor) -> None:
    """Accumulate gradients of a scalar loss into every reachable tensor."""
    if loss.value.shape != ():
        raise ValueError("backward requires a scalar loss")
    topo: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            topo.append(node)
            continue
        if id(node) in seen or not node.requires_grad:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            stack.append((p, False))
    for node in topo:
        node.grad = None
    loss.grad = np.ones(())
    for node in reversed(topo):
        if node.grad is None:
            continue
        for parent, fn in zip(node.parents, node.grad_fns):
            if not parent.requires_grad:
                continue
            g = fn(node.grad)
            parent.grad = g if parent.grad is None else parent.grad + g
