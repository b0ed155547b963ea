# # Second-order forward mode in two variables
#
# A HyperDual2 number carries a value together with d/dx, d/dy, d2/dx2 and
# d2/dy2. Seeding x and y and then doing ordinary arithmetic propagates all
# five slots at once, which is all the PDE residual needs.

import math

import numpy as np

from pinnlab.autodiff import X, Y, GELU, ELU, Sigmoid, Tanh, activation_derivs, exp, hd_var, sin

# ## Seeding and arithmetic

x = hd_var(2.0, X)
y = hd_var(3.0, Y)
print("x*x*y ->", (x * x * y).slots())  # (12, 12, 4, 6, 0)

# The elementary functions dispatch on the argument type, so the same
# expression works on floats, arrays and HyperDual2 values.

h = sin(x) * exp(y)
print("sin(x) exp(y) ->", tuple(float(v) for v in h.slots()))
print("by hand        ->", (math.sin(2) * math.exp(3), math.cos(2) * math.exp(3),
                            math.sin(2) * math.exp(3), -math.sin(2) * math.exp(3),
                            math.sin(2) * math.exp(3)))

# Slots can hold arrays too: one HyperDual2 then stands for a whole batch.

xs = hd_var(np.linspace(0, 1, 5), X)
print("d/dx sin(pi x) on 5 points:", sin(math.pi * xs).dx)

# ## Activations with analytic derivatives
#
# Each activation returns f, f', f'' (and f''' for the fused backward pass).

z = np.linspace(-3, 3, 7)
for act in (Sigmoid(), Tanh(), GELU(), ELU()):
    f, f1, f2 = activation_derivs(act, z, 2)
    print(f"{str(act):8s} f={np.round(f, 4)}")

# A quick finite-difference look at tanh'':

t = 0.7
step = 1e-5
fd = (activation_derivs(Tanh(), t + step, 1)[1] - activation_derivs(Tanh(), t - step, 1)[1]) / (2 * step)
print("tanh''(0.7): analytic", activation_derivs(Tanh(), t, 2)[2], "fd", fd)
