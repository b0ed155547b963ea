"""Second-order forward-mode scalars over the two spatial inputs.

A :class:`HyperDual2` carries a value together with the first partials
along x and y and the two pure second partials. The mixed partial is not
tracked; the PDE residual only needs psi, psi_y, psi_xx and psi_yy.

Slots may hold Python floats, numpy arrays (one lane per collocation
point) or reverse-mode :class:`~pinnlab.autodiff.reverse.Var` nodes.
"""
from __future__ import annotations

import enum

import numpy as np


class Axis(enum.Enum):
    X = "x"
    Y = "y"


X = Axis.X
Y = Axis.Y


class HyperDual2:
    __slots__ = ("v", "dx", "dy", "dxx", "dyy")

    def __init__(self, v, dx=0.0, dy=0.0, dxx=0.0, dyy=0.0):
        self.v = v
        self.dx = dx
        self.dy = dy
        self.dxx = dxx
        self.dyy = dyy

    @classmethod
    def const(cls, value):
        return cls(value, 0.0, 0.0, 0.0, 0.0)

    def slots(self):
        return (self.v, self.dx, self.dy, self.dxx, self.dyy)

    def __repr__(self):
        return (f"HyperDual2(v={self.v!r}, dx={self.dx!r}, dy={self.dy!r}, "
                f"dxx={self.dxx!r}, dyy={self.dyy!r})")

    def __getitem__(self, idx):
        return HyperDual2(*(_index(s, idx) for s in self.slots()))

    def __neg__(self):
        return HyperDual2(-self.v, -self.dx, -self.dy, -self.dxx, -self.dyy)

    def __add__(self, other):
        return hd_add(self, other)

    def __radd__(self, other):
        return hd_add(_coerce(other), self)

    def __sub__(self, other):
        other = _coerce(other)
        return HyperDual2(self.v - other.v, self.dx - other.dx, self.dy - other.dy,
                          self.dxx - other.dxx, self.dyy - other.dyy)

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        return hd_mul(self, other)

    def __rmul__(self, other):
        return hd_mul(_coerce(other), self)

    def __truediv__(self, other):
        return hd_div(self, other)

    def __rtruediv__(self, other):
        return hd_div(_coerce(other), self)

    # matrix products act slot-wise: the map is linear
    def __matmul__(self, other):
        return HyperDual2(*(s @ other for s in self.slots()))


def _index(slot, idx):
    if np.ndim(slot) == 0 and not hasattr(slot, "value"):
        return slot
    return slot[idx]


def _coerce(a):
    return a if isinstance(a, HyperDual2) else HyperDual2.const(a)


def hd_var(value, axis):
    """Seed ``value`` as the independent variable along ``axis``."""
    if axis is Axis.X:
        return HyperDual2(value, 1.0, 0.0, 0.0, 0.0)
    if axis is Axis.Y:
        return HyperDual2(value, 0.0, 1.0, 0.0, 0.0)
    raise ValueError(f"axis must be X or Y, got {axis!r}")


def hd_add(a, b):
    a, b = _coerce(a), _coerce(b)
    return HyperDual2(a.v + b.v, a.dx + b.dx, a.dy + b.dy, a.dxx + b.dxx, a.dyy + b.dyy)


def hd_mul(a, b):
    if not isinstance(b, HyperDual2):
        return HyperDual2(a.v * b, a.dx * b, a.dy * b, a.dxx * b, a.dyy * b)
    if not isinstance(a, HyperDual2):
        return HyperDual2(a * b.v, a * b.dx, a * b.dy, a * b.dxx, a * b.dyy)
    return HyperDual2(
        a.v * b.v,
        a.dx * b.v + a.v * b.dx,
        a.dy * b.v + a.v * b.dy,
        a.dxx * b.v + 2.0 * a.dx * b.dx + a.v * b.dxx,
        a.dyy * b.v + 2.0 * a.dy * b.dy + a.v * b.dyy,
    )


def hd_div(a, b):
    b = _coerce(b)
    bv = getattr(b.v, "value", b.v)
    if np.any(np.asarray(bv) == 0):
        raise ZeroDivisionError("HyperDual2 division by a value of 0")
    r = 1.0 / b.v
    return hd_mul(a, hd_chain(b, r, -r * r, 2.0 * r * r * r))


def hd_chain(a, f0, f1, f2):
    """Apply the second-order chain rule given f, f', f'' evaluated at ``a.v``."""
    return HyperDual2(
        f0,
        f1 * a.dx,
        f1 * a.dy,
        f2 * a.dx * a.dx + f1 * a.dxx,
        f2 * a.dy * a.dy + f1 * a.dyy,
    )


def hd_unary(f, f1, f2, a):
    a = _coerce(a)
    return hd_chain(a, f(a.v), f1(a.v), f2(a.v))


def sin(a):
    if isinstance(a, HyperDual2):
        s = np.sin(a.v)
        return hd_chain(a, s, np.cos(a.v), -s)
    return np.sin(a)


def cos(a):
    if isinstance(a, HyperDual2):
        c = np.cos(a.v)
        return hd_chain(a, c, -np.sin(a.v), -c)
    return np.cos(a)


def exp(a):
    if isinstance(a, HyperDual2):
        e = np.exp(a.v)
        return hd_chain(a, e, e, e)
    return np.exp(a)


def hd_stack(items):
    """Stack scalars (or lane arrays) along a new last axis, slot by slot."""
    items = [_coerce(it) for it in items]
    out = []
    for k in range(5):
        parts = [it.slots()[k] for it in items]
        shape = np.broadcast_shapes(*(np.shape(s) for s in parts))
        out.append(np.stack([np.broadcast_to(np.asarray(s, dtype=float), shape) for s in parts],
                            axis=-1))
    return HyperDual2(*out)
