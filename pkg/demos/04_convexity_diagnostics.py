"""Levi-convexity diagnostics: Levi forms and a bounded exhaustion function.

Two independent ways to evaluate the Levi form of the boundary are compared
(second derivatives of the defining function versus the Laplacian of its
pullback to a small probe disc), and the weakly convex boundary
|z1|^2 + |z2|^4 = 1 is scanned for parameters (A, eta) making
-(-r e^{-A psi})^eta plurisubharmonic near the boundary -- the bounded
exhaustion that controls how attached discs approach their boundary circle.
"""

import numpy as np

from leviflat import cli
from leviflat import geometry as G
from leviflat.scenarios import make_scenario

# cross-check the two Levi-form evaluations in a perturbed structure
sc = make_scenario("perturbed-ball")
rng = np.random.default_rng(0)
worst = 0.0
for _ in range(20):
    p = rng.uniform(-0.6, 0.6, 4)
    t = rng.standard_normal(4)
    t /= np.linalg.norm(t)
    v1 = G.levi_form(sc.chart, sc.chart.defining_r, p, t)
    v2 = G.levi_form_via_disc(sc.chart, sc.chart.defining_r, p, t)
    worst = max(worst, abs(v1 - v2))
print(f"Levi form vs probe-disc oracle (20 samples): max diff {worst:.2e}")

# scan for a plurisubharmonic bounded exhaustion on the weak boundary
weak = make_scenario("weak-m2")
best = cli.df_scan(weak)
print(f"weak-m2 exhaustion scan: A = {best['A']:g}, eta = {best['eta']:g}, "
      f"min Levi value {best['min_levi']:.3f}, "
      f"positive at {100 * best['positive_fraction']:.0f}% of samples")
print("passed" if best["passed"] else "no admissible parameters found")
