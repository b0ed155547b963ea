# # The trial function
#
# We solve  psi_xx + psi_yy + psi * psi_y = f  on the unit square, with exact
# solution psi = y^2 sin(pi x). The approximation is
#
#     psi_ap = A + F * N
#
# where A = y sin(pi x) matches the Dirichlet data and
# F = sin(x-1) sin(y-1) sin(x) sin(y) vanishes on every edge, so the network
# N never has to learn the boundary.

import numpy as np

from pinnlab import LayerSpec, init_params, zero_params
from pinnlab.problem import (
    boundary_A, exact_residual, gate_F, neumann_mismatch, residual, trial_psi, validate_mae,
)

spec = LayerSpec.uniform([2, 30, 1], "tanh", linear_output=True)

# ## Boundary behaviour
#
# Whatever the weights are, psi_ap equals A on the boundary.

p = init_params(spec, seed=0)
t = np.linspace(0, 1, 6)
print("gate on y=0:", gate_F((t, 0 * t)))
print("psi_ap - A on x=1:", trial_psi(spec, p, (np.ones_like(t), t)).v - boundary_A((1.0, t)))

# ## Residuals
#
# The exact solution has zero residual up to rounding.

pts = np.random.default_rng(0).random((1000, 2))
print("max |r| for exact psi:", np.abs(exact_residual((pts[:, 0], pts[:, 1])).residual).max())

# For N = 0 the residual at the centre is -pi^2/4 - 7/4.

z = zero_params(spec)
print("zero network residual at centre:", residual(spec, z, (0.5, 0.5)).residual,
      -np.pi ** 2 / 4 - 1.75)

# ## Validation
#
# MAE is measured on a cell-centred 100 x 100 grid. For N = 0 it is close to
# the continuum value 1/(3 pi).

print("zero network MAE:", validate_mae(spec, z), "vs", 1 / (3 * np.pi))

# The top edge carries a Neumann condition psi_y(x, 1) = 2 sin(pi x) that the
# trial function does not enforce; we only report how far off it is.

print("Neumann mismatch, zero network:", neumann_mismatch(spec, z), "(2/pi =", 2 / np.pi, ")")
