"""A small reverse-mode tape over numpy arrays.

Only the operations needed to differentiate network objectives with
respect to their weights are provided. Nodes record their parents and a
closure mapping the output adjoint to parent adjoints.
"""
from __future__ import annotations

import numpy as np

from .activations import Activation, activation_derivs


class Var:
    __array_ufunc__ = None  # make numpy defer to our reflected operators
    __slots__ = ("value", "parents", "grad")

    def __init__(self, value, parents=()):
        self.value = np.asarray(value, dtype=float)
        # parents: sequence of (node, adjoint_fn)
        self.parents = parents
        self.grad = None

    def __repr__(self):
        return f"Var({self.value!r})"

    @property
    def shape(self):
        return self.value.shape

    @property
    def T(self):
        return Var(self.value.T, ((self, lambda g: g.T),))

    def __getitem__(self, idx):
        shape = self.value.shape

        def back(g):
            out = np.zeros(shape)
            np.add.at(out, idx, g)
            return out

        return Var(self.value[idx], ((self, back),))

    def __neg__(self):
        return Var(-self.value, ((self, lambda g: -g),))

    def __add__(self, other):
        if isinstance(other, Var):
            return Var(self.value + other.value,
                       ((self, _unbroadcast_to(self.shape)), (other, _unbroadcast_to(other.shape))))
        return Var(self.value + other, ((self, _unbroadcast_to(self.shape)),))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Var):
            a, b = self.value, other.value
            return Var(a * b, ((self, lambda g: _sum_to(g * b, a.shape)),
                               (other, lambda g: _sum_to(g * a, b.shape))))
        c = np.asarray(other, dtype=float)
        shape = self.shape
        return Var(self.value * c, ((self, lambda g: _sum_to(g * c, shape)),))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Var):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other, dtype=float))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def reciprocal(self):
        r = 1.0 / self.value
        return Var(r, ((self, lambda g: -g * r * r),))

    def __pow__(self, n):
        if not isinstance(n, (int, float)):
            raise TypeError("only constant exponents are supported")
        a = self.value
        return Var(a ** n, ((self, lambda g: g * n * a ** (n - 1)),))

    def __matmul__(self, other):
        if isinstance(other, Var):
            a, b = self.value, other.value
            return Var(a @ b, ((self, lambda g: _matmul_back_left(g, b, a.shape)),
                               (other, lambda g: _matmul_back_right(g, a, b.shape))))
        b = np.asarray(other, dtype=float)
        a = self.value
        return Var(a @ b, ((self, lambda g: _matmul_back_left(g, b, a.shape)),))

    def __rmatmul__(self, other):
        a = np.asarray(other, dtype=float)
        b = self.value
        return Var(a @ b, ((self, lambda g: _matmul_back_right(g, a, b.shape)),))

    def sum(self):
        shape = self.shape
        return Var(self.value.sum(), ((self, lambda g: np.broadcast_to(g, shape)),))

    def mean(self):
        return self.sum() * (1.0 / self.value.size)


def _sum_to(g, shape):
    g = np.asarray(g)
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for i, n in enumerate(shape):
        if n == 1 and g.shape[i] != 1:
            g = g.sum(axis=i, keepdims=True)
    return np.broadcast_to(g, shape)


def _unbroadcast_to(shape):
    return lambda g: _sum_to(g, shape)


def _matmul_back_left(g, b, a_shape):
    if b.ndim == 1:
        return _sum_to(np.multiply.outer(g, b), a_shape)
    return _sum_to(g @ np.swapaxes(b, -1, -2), a_shape)


def _matmul_back_right(g, a, b_shape):
    if a.ndim == 1:
        return _sum_to(np.multiply.outer(a, g), b_shape)
    # fold leading batch axes of a into the contraction
    a2 = a.reshape(-1, a.shape[-1])
    if len(b_shape) == 1:
        return a2.T @ np.asarray(g).reshape(-1)
    g2 = np.asarray(g).reshape(-1, b_shape[-1])
    return a2.T @ g2


def activation_node(act: Activation, z: Var, order: int) -> Var:
    """The ``order``-th derivative of ``act`` applied elementwise to ``z``."""
    vals = activation_derivs(act, z.value, order + 1)
    slope = vals[order + 1]
    return Var(vals[order], ((z, lambda g: g * slope),))


def backward(out: Var):
    """Accumulate d(out)/d(node) into ``node.grad`` for every ancestor."""
    order, seen = [], set()
    stack = [(out, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent, _ in node.parents:
            if id(parent) not in seen:
                stack.append((parent, False))
    for node in order:
        node.grad = None
    out.grad = np.ones_like(out.value)
    for node in reversed(order):
        if node.grad is None:
            continue
        for parent, fn in node.parents:
            contrib = fn(node.grad)
            parent.grad = contrib if parent.grad is None else parent.grad + contrib
