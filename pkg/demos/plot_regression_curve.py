"""
Circular-circular regression
============================

Under a wrapped bivariate normal, the conditional mean direction of
``X2`` given ``X1`` is a smooth curve whose concentration does not depend
on ``x1``. Check it against brute-force simulation.
"""

import numpy as np

from wrapgp import RegressionCurve, wrap

curve = RegressionCurve(mu1=1.0, mu2=4.0, sigma2=1.2, rho=0.7)
print(f"conditional concentration {curve.concentration:.4f}")

rng = np.random.default_rng(5)
cov = curve.sigma2 * np.array([[1, curve.rho], [curve.rho, 1]])
y = rng.multivariate_normal([curve.mu1, curve.mu2], cov, size=4_000_000)
x1, x2 = wrap(y[:, 0]), wrap(y[:, 1])

for x in np.linspace(0.25, 6.0, 8):
    near = np.abs(np.remainder(x1 - x + np.pi, 2 * np.pi) - np.pi) < 0.03
    sim = np.angle(np.mean(np.exp(1j * x2[near]))) % (2 * np.pi)
    direction, _ = curve(x)
    print(f"x1={x:4.2f}  curve {direction:.3f}  simulated {sim:.3f}")
