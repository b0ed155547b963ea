from .activations import (
    ELU,
    GELU,
    KINDS,
    Activation,
    ReLU,
    Sigmoid,
    Tanh,
    activation_derivs,
    activation_eval,
)
from .gradient import central_difference, grad_params
from .hyperdual import (
    X,
    Y,
    Axis,
    HyperDual2,
    cos,
    exp,
    hd_add,
    hd_chain,
    hd_div,
    hd_mul,
    hd_stack,
    hd_unary,
    hd_var,
    sin,
)
from .reverse import Var, activation_node, backward

__all__ = [
    "Activation", "Axis", "ELU", "GELU", "HyperDual2", "KINDS", "ReLU", "Sigmoid", "Tanh",
    "Var", "X", "Y", "activation_derivs", "activation_eval", "activation_node", "backward",
    "central_difference", "cos", "exp", "grad_params", "hd_add", "hd_chain", "hd_div",
    "hd_mul", "hd_stack", "hd_unary", "hd_var", "sin",
]
