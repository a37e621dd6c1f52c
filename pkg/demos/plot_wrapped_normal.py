"""
The wrapped normal and its winding numbers
==========================================

A wrapped normal angle is ``X = Y mod 2*pi`` with ``Y`` Gaussian. The
integer ``K`` with ``Y = X + 2*pi*K`` is lost by wrapping; given ``X`` its
conditional law is what the sampler draws at every sweep.
"""

import numpy as np
from scipy.integrate import trapezoid

from wrapgp import WnParams, k_conditional, truncation_window, wn_density, wn_sample

params = WnParams(mu=np.pi, sigma2=1.5)

# the winding sum is truncated to a window that grows with sigma
for sigma in (0.1, 1.0, 4.0):
    print(f"sigma={sigma:<4}  window m={truncation_window(sigma).m}")

# the truncated density integrates to one on [0, 2*pi)
grid = np.linspace(0, 2 * np.pi, 2001)
dens = wn_density(grid, params)
print("integral          ", trapezoid(dens, grid))

# compare with a histogram of wrapped draws
draws = wn_sample(params, 50_000, rng=1)
hist, edges = np.histogram(draws, bins=12, range=(0, 2 * np.pi), density=True)
mids = 0.5 * (edges[1:] + edges[:-1])
for m, h in zip(mids, hist):
    print(f"{m:5.2f}  empirical {h:.3f}  density {wn_density(m, params):.3f}")

# K given an observed angle near the cut: most of the mass sits on 0 and 1
kd = k_conditional(0.2, params.mu, params.sigma)
for k, p in zip(kd.support, kd.probs):
    print(f"P(K={k:+d} | x=0.2) = {p:.4f}")
