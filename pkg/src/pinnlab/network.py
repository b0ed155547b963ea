"""Fully connected network with a per-layer activation.

Parameters are stored layer by layer as ``W_i`` of shape (fan_out, fan_in)
and ``b_i`` of shape (fan_out,). The flat view concatenates, for each
layer in order, ``W_i`` in row-major order followed by ``b_i``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import json

import numpy as np

from .autodiff import Activation, HyperDual2, Var, activation_derivs, activation_eval
from .autodiff import activation_node, hd_chain, hd_stack

INPUT_DIM = 2


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass(frozen=True)
class LayerSpec:
    sizes: tuple = (2, 30, 1)
    activations: tuple = field(default_factory=lambda: (Activation("tanh"),) * 2)
    linear_output: bool = False

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        acts = tuple(a if isinstance(a, Activation) else Activation.parse(a)
                     for a in self.activations)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "activations", acts)
        if len(sizes) < 2:
            raise ConfigError("sizes: need at least an input and an output layer")
        if any(s < 1 for s in sizes):
            raise ConfigError(f"sizes: layer widths must be positive, got {list(sizes)}")
        if sizes[0] != INPUT_DIM:
            raise ConfigError(f"sizes[0]: input dimension must be {INPUT_DIM}, got {sizes[0]}")
        if len(acts) != len(sizes) - 1:
            raise ConfigError(f"activations: expected {len(sizes) - 1} entries, got {len(acts)}")

    @classmethod
    def uniform(cls, sizes, activation, linear_output=False):
        """Same activation on every non-input layer."""
        if not isinstance(activation, Activation):
            activation = Activation.parse(activation)
        return cls(tuple(sizes), (activation,) * (len(sizes) - 1), linear_output)

    @property
    def shapes(self):
        return [(fo, fi) for fi, fo in zip(self.sizes[:-1], self.sizes[1:])]

    def to_dict(self):
        return {
            "sizes": list(self.sizes),
            "activations": [str(a) for a in self.activations],
            "linear_output": self.linear_output,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(d["sizes"]), tuple(d["activations"]), bool(d.get("linear_output", False)))


@dataclass(eq=False)
class Params:
    weights: list
    biases: list

    @property
    def size(self):
        return sum(np.size(w) + np.size(b) for w, b in zip(self.weights, self.biases))

    def layers(self):
        return zip(self.weights, self.biases)

    def map(self, fn):
        return Params([fn(w) for w in self.weights], [fn(b) for b in self.biases])

    def flatten(self):
        parts = []
        for w, b in self.layers():
            parts.append(np.ravel(w))
            parts.append(np.ravel(b))
        return np.concatenate(parts)

    def copy(self):
        return self.map(np.array)


def param_count(spec: LayerSpec) -> int:
    return sum(fo * fi + fo for fo, fi in spec.shapes)


def init_params(spec: LayerSpec, seed: int) -> Params:
    """Glorot-uniform weights and zero biases, reproducible from ``seed``."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fo, fi in spec.shapes:
        limit = np.sqrt(6.0 / (fi + fo))
        weights.append(rng.uniform(-limit, limit, size=(fo, fi)))
        biases.append(np.zeros(fo))
    return Params(weights, biases)


def zero_params(spec: LayerSpec) -> Params:
    return unflatten(spec, np.zeros(param_count(spec)))


def unflatten(spec: LayerSpec, vec) -> Params:
    vec = np.asarray(vec, dtype=float)
    n = param_count(spec)
    if vec.ndim != 1 or vec.size != n:
        raise ConfigError(f"params: expected a flat vector of length {n}, got shape {vec.shape}")
    weights, biases, k = [], [], 0
    for fo, fi in spec.shapes:
        weights.append(vec[k:k + fo * fi].reshape(fo, fi).copy())
        k += fo * fi
        biases.append(vec[k:k + fo].copy())
        k += fo
    return Params(weights, biases)


def flatten(p: Params) -> np.ndarray:
    return p.flatten()


def activate(act: Activation, z):
    """Apply ``act`` to a real array, a tape node, or a HyperDual2."""
    if isinstance(z, HyperDual2):
        if isinstance(z.v, Var):
            f0, f1, f2 = (activation_node(act, z.v, k) for k in range(3))
        else:
            f0, f1, f2 = activation_eval(act, z.v)
        return hd_chain(z, f0, f1, f2)
    if isinstance(z, Var):
        return activation_node(act, z, 0)
    return activation_derivs(act, z, 0)[0]


def _affine(h, w, b):
    if isinstance(h, HyperDual2):
        wt = w.T
        return HyperDual2(h.v @ wt + b, h.dx @ wt, h.dy @ wt, h.dxx @ wt, h.dyy @ wt)
    return h @ w.T + b


def forward(spec: LayerSpec, p: Params, inputs):
    """Evaluate the network at ``inputs = (x, y)``.

    ``x`` and ``y`` may be floats, equally shaped arrays (one output per
    lane) or HyperDual2 values; the result has the same kind.
    """
    x, y = inputs
    if isinstance(x, HyperDual2) or isinstance(y, HyperDual2):
        h = hd_stack([x, y])
    else:
        h = np.stack(np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float)),
                     axis=-1)
    last = len(spec.activations) - 1
    for i, ((w, b), act) in enumerate(zip(p.layers(), spec.activations)):
        h = _affine(h, w, b)
        if not (i == last and spec.linear_output):
            h = activate(act, h)
    return h[..., 0]


def params_to_json(spec: LayerSpec, p: Params) -> str:
    # repr gives the shortest string that round-trips the float exactly
    flat = [float(v) for v in p.flatten()]
    return json.dumps({"spec": spec.to_dict(), "params": flat}, indent=1) + "\n"


def params_from_json(text: str):
    """Parse a params document, returning ``(spec, params)``."""
    try:
        doc = json.loads(text)
        spec = LayerSpec.from_dict(doc["spec"])
        flat = doc["params"]
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"params file: malformed document ({exc})") from exc
    return spec, unflatten(spec, flat)
