"""The Gaussian-weighted differential operators, applied numerically.

With weight e^(-|x|^2/2) the weighted Laplacian is the Ornstein-Uhlenbeck
operator Lap u - <x, grad u>; coordinate functions are eigenfunctions with
eigenvalue -1, and the weighted divergence obeys the product rule
div_f(u grad u) = |grad u|^2 + u Lap_f u.
"""

import math

import numpy as np

from shrinkerlab import fields as fl

print("== coordinate functions: Lap_f x_A = -x_A")
for p in ([2.0, 0.0, 0.0], [0.3, -1.2, 0.7]):
    f = fl.ScalarField(lambda x: x[0])
    print(f"  at {p}: Lap_f x_1 = {fl.weighted_laplacian(f, p):+.6f} "
          f"(exact {-p[0]:+.6f})")

print("\n== |x|^2 in R^3: Lap_f = 2n - 2|x|^2")
f = fl.ScalarField(lambda x: float(np.dot(x, x)))
p = np.array([1.0, 1.0, 0.0])
print(f"  at (1,1,0): {fl.weighted_laplacian(f, p):.6f} (exact 2)")

print("\n== product rule check at a few points")
u = fl.ScalarField(lambda x: math.sin(x[0]) * math.exp(0.3 * x[1]))
for p in (np.array([0.4, -0.2]), np.array([1.1, 0.8])):
    grad = fl.gradient(u, p, h=2e-4)
    lhs = fl.weighted_divergence(
        fl.VectorField(lambda x: u(x) * fl.gradient(u, x, h=2e-4)), p, h=2e-4)
    rhs = float(np.dot(grad, grad)) + u(p) * fl.weighted_laplacian(u, p, h=2e-4)
    print(f"  at {p}: div_f(u grad u) = {lhs:+.8f}   "
          f"|grad u|^2 + u Lap_f u = {rhs:+.8f}")

print("\n== second-order convergence of the differencing")
exact = (-math.sin(0.7) + 0.09 * math.sin(0.7)
         - 0.7 * math.cos(0.7) + 0.12 * math.sin(0.7)) * math.exp(-0.12)
p = np.array([0.7, -0.4])
for h in (1e-2, 5e-3, 2.5e-3):
    err = abs(fl.weighted_laplacian(u, p, h=h) - exact)
    print(f"  h = {h:7.4f}: |error| = {err:.3e}")

print("\n== grid round trip (binary layout: dims, spacing, origin, payload)")
vals = np.fromfunction(lambda i, j: np.sin(i / 3) + j, (6, 5))
g = fl.GridField(origin=(0, 0), spacing=(0.5, 0.25), values=vals)
g2 = fl.GridField.from_binary(g.to_binary())
print(f"  payload {len(g.to_binary())} bytes, values identical: "
      f"{np.array_equal(g.values, g2.values)}")
