"""Tour of the spectral calculus on the unit disc.

The library discretizes the closed unit disc with equispaced angles and
Gauss-Legendre radial nodes plus a boundary ring.  On that grid it provides
spectrally accurate derivatives, the dbar operator, and the Cauchy-Green
transform T, a right inverse of dbar that is the workhorse of the nonlinear
disc equation: dbar(T f) = f with T f holomorphic exactly when f = 0.
"""

import numpy as np

from leviflat.calculus import DiscField, DiscGrid, cauchy_green, dbar

grid = DiscGrid(64, 32)
print(f"grid: {grid.n_theta} angles x {grid.n_radial} radii "
      f"(boundary ring included)")

# quadrature sanity: the area of the unit disc
area = float(np.sum(grid.area_weights))
print(f"quadrature area of the disc: {area:.15f}  (pi = {np.pi:.15f})")

# dbar annihilates holomorphic fields and sees anti-holomorphic ones exactly
hol = DiscField.from_function(grid, lambda z: z ** 3 - 0.5 * z)
anti = DiscField.from_function(grid, np.conj)
print(f"dbar on a holomorphic field:  {dbar(hol).sup_norm():.2e}")
print(f"dbar(conj z) - 1:             "
      f"{(dbar(anti) - DiscField.from_function(grid, lambda z: np.ones_like(z))).sup_norm():.2e}")

# the Cauchy-Green transform is a right inverse of dbar...
for label, fn in [("1", lambda z: np.ones_like(z)),
                  ("conj(z)", np.conj),
                  ("e^z conj(z)^2", lambda z: np.exp(z) * np.conj(z) ** 2)]:
    f = DiscField.from_function(grid, fn)
    res = (dbar(cauchy_green(f)) - f).sup_norm()
    print(f"|dbar(T f) - f| for f = {label:<14s}: {res:.2e}")

# ... and T(1) is the closed form conj(z)
one = DiscField.from_function(grid, lambda z: np.ones_like(z))
print(f"|T(1) - conj(z)|: "
      f"{np.max(np.abs(cauchy_green(one).values - np.conj(grid.zeta))):.2e}")
