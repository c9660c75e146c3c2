"""Admissibility, derived exponents and the free-space Riesz potential.

Checks both pinned parameter sets, prints s_c, A, B and the Riesz constant,
then compares the free-space Newtonian potential of a Gaussian with its
closed form erf(r/√2σ)/(4πr) and shows how far the periodic multiplier is
from it on the same box.
"""
import math

import numpy as np
from scipy.special import erf

from choquard import operators as ops
from choquard.grid import SpatialGrid
from choquard.model import NEAR_MASS_CRITICAL, REFERENCE, ModelParams, derive_exponents, p_range, validate

for name, prm in (("reference", REFERENCE), ("near mass-critical", NEAR_MASS_CRITICAL)):
    e = derive_exponents(prm)
    lo, hi = p_range(prm.dim, prm.alpha, prm.b)
    print(f"{name:>20}: alpha={prm.alpha:g} b={prm.b:g} p={prm.p:g}  p in ({lo:g}, {hi:g})  "
          f"s_c={e.s_c:g} A={e.A:g} B={e.B:g} K={e.K_riesz:.6f}")

# p = 2 sits on the lower end of the range for the reference (alpha, b)
print("p=2 violations:", validate(ModelParams(3, 2.0, -0.5, 2.0)).violations)

g = SpatialGrid(3, 16.0, 64)
r = np.sqrt(g.r_squared)
rho = np.exp(-g.r_squared / 2) / (2 * np.pi) ** 1.5
sel = (r >= g.spacing) & (r <= 4.0)
exact = erf(r[sel] / math.sqrt(2)) / (4 * np.pi * r[sel])
for boundary in ("free", "periodic"):
    V = ops.riesz_convolve(g, rho, 2.0, boundary)
    print(f"{boundary:>8} Riesz potential: max relative error on [h, L/4] = "
          f"{np.max(np.abs(V[sel] - exact) / exact):.2e}")
