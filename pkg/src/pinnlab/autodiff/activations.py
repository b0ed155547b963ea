"""Activation functions with hand-coded derivatives.

Every kind returns f, f', f'' (and f''' for the parameter-gradient
backward pass). Kinks of ReLU and ELU at z = 0 take the right-limit first
derivative and a zero second derivative.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy.special import expit

KINDS = ("sigmoid", "tanh", "relu", "elu", "gelu")

GELU_CUBIC = 0.044715
_GELU_SCALE = math.sqrt(2.0 / math.pi)


@dataclass(frozen=True)
class Activation:
    """One of the five supported nonlinearities.

    ``alpha`` is the leak slope for ReLU (in [0, 1]) and the negative-side
    scale for ELU (nonzero); it is ignored by the other kinds.
    """

    kind: str
    alpha: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown activation {self.kind!r}; expected one of {KINDS}")
        if self.kind == "relu" and not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"ReLU alpha must lie in [0, 1], got {self.alpha}")
        if self.kind == "elu" and self.alpha == 0.0:
            raise ValueError("ELU alpha must be nonzero")
        if self.kind not in ("relu", "elu") and self.alpha != 0.0:
            object.__setattr__(self, "alpha", 0.0)

    @classmethod
    def parse(cls, text: str) -> "Activation":
        """Build from ``"tanh"``, ``"relu"``, ``"relu:0.01"``, ``"elu:0.5"`` ..."""
        name, _, alpha = text.strip().lower().partition(":")
        if alpha:
            return cls(name, float(alpha))
        return cls(name, 1.0 if name == "elu" else 0.0)

    def __str__(self):
        if self.kind == "elu" and self.alpha != 1.0:
            return f"elu:{self.alpha!r}"
        if self.kind == "relu" and self.alpha != 0.0:
            return f"relu:{self.alpha!r}"
        return self.kind


def Sigmoid():
    return Activation("sigmoid")


def Tanh():
    return Activation("tanh")


def ReLU(alpha=0.0):
    return Activation("relu", alpha)


def ELU(alpha=1.0):
    return Activation("elu", alpha)


def GELU():
    return Activation("gelu")


def _sigmoid(z, order):
    s = expit(z)
    d1 = s * (1.0 - s)
    out = [s, d1, d1 * (1.0 - 2.0 * s), d1 - 6.0 * d1 * d1]
    return out[: order + 1]


def _tanh(z, order):
    t = np.tanh(z)
    d1 = 1.0 - t * t
    out = [t, d1, -2.0 * t * d1, d1 * (6.0 * t * t - 2.0)]
    return out[: order + 1]


def _relu(z, order, alpha):
    pos = z >= 0
    out = [np.where(pos, z, alpha * z), np.where(pos, 1.0, alpha)]
    zero = np.zeros_like(z, dtype=float)
    out += [zero, zero]
    return out[: order + 1]


def _elu(z, order, alpha):
    pos = z >= 0
    e = alpha * np.exp(np.minimum(z, 0.0))
    val = np.where(pos, z, alpha * np.expm1(np.minimum(z, 0.0)))
    neg = np.where(pos, 0.0, e)
    out = [val, np.where(pos, 1.0, e), neg, neg]
    return out[: order + 1]


def _gelu(z, order):
    c, k = _GELU_SCALE, GELU_CUBIC
    u = c * (z + k * z ** 3)
    t = np.tanh(u)
    val = 0.5 * z * (1.0 + t)
    if order == 0:
        return [val]
    s = 1.0 - t * t
    u1 = c * (1.0 + 3.0 * k * z * z)
    u2 = 6.0 * c * k * z
    t1 = s * u1
    t2 = s * (u2 - 2.0 * t * u1 * u1)
    out = [val, 0.5 * (1.0 + t) + 0.5 * z * t1, t1 + 0.5 * z * t2]
    if order >= 3:
        u3 = 6.0 * c * k
        t3 = s * (u3 - 6.0 * t * u1 * u2 + (4.0 * t * t - 2.0 * s) * u1 ** 3)
        out.append(1.5 * t2 + 0.5 * z * t3)
    return out[: order + 1]


def activation_derivs(act: Activation, z, order=2):
    """Return ``[f(z), f'(z), ..., f^(order)(z)]`` for ``order`` in 0..3."""
    if not 0 <= order <= 3:
        raise ValueError("order must be between 0 and 3")
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=float)
    if act.kind == "sigmoid":
        out = _sigmoid(z, order)
    elif act.kind == "tanh":
        out = _tanh(z, order)
    elif act.kind == "relu":
        out = _relu(z, order, act.alpha)
    elif act.kind == "elu":
        out = _elu(z, order, act.alpha)
    else:
        out = _gelu(z, order)
    if scalar:
        return [float(o) for o in out]
    return [np.broadcast_to(o, z.shape) if np.shape(o) != z.shape else o for o in out]


def activation_eval(act: Activation, z):
    """Value, first and second derivative of ``act`` at ``z``."""
    return tuple(activation_derivs(act, z, 2))
