from __future__ import annotations

import numpy as np

from .reverse import Var, backward


def grad_params(objective, p):
    """Gradient of a scalar ``objective(params)`` with respect to every parameter.

    ``objective`` receives a copy of ``p`` whose arrays are tape nodes and
    must combine them with operators the tape supports (arithmetic, ``@``,
    ``.sum()``, ``.mean()``, and the network / residual code of this
    package). The result is a flat vector in :meth:`Params.flatten` order.
    """
    leaves = p.map(Var)
    out = objective(leaves)
    if not isinstance(out, Var):
        value = float(out)
        if not np.isfinite(value):
            raise FloatingPointError(f"objective is not finite at p: {value!r}")
        return np.zeros(p.size)
    if out.value.size != 1:
        raise ValueError(f"objective must be scalar, got shape {out.value.shape}")
    if not np.isfinite(out.value):
        raise FloatingPointError(f"objective is not finite at p: {float(out.value)!r}")
    backward(out)
    grads = leaves.map(lambda node: np.zeros(node.shape) if node.grad is None else node.grad)
    flat = grads.flatten()
    bad = np.flatnonzero(~np.isfinite(flat))
    if bad.size:
        raise FloatingPointError(f"non-finite gradient at parameter index {int(bad[0])}")
    return flat


def central_difference(fun, x, rel_step=1e-5):
    """Central finite-difference gradient of ``fun`` at flat vector ``x``.

    The step for coordinate i is ``rel_step * max(1, |x_i|)``.
    """
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        h = rel_step * max(1.0, abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (fun(xp) - fun(xm)) / (2.0 * h)
    return g
