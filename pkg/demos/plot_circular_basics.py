"""
Circular summaries of wind directions
=====================================

Angles live on the circle, so the arithmetic mean is the wrong summary.
Here we compare it with the circular mean and look at the resultant
length as a measure of spread.
"""

import numpy as np

from wrapgp import circular_distance, circular_mean, moments_estimate, rayleigh_test

rng = np.random.default_rng(0)

# directions clustered around north (0 rad), straddling the cut at 2*pi
angles = np.remainder(rng.normal(0.0, 0.3, 200), 2 * np.pi)

print("arithmetic mean  ", angles.mean())
print("circular mean    ", circular_mean(angles))

# moment estimates of the wrapped normal: mean direction and concentration
est = moments_estimate(angles)
print("moment estimates ", est)
print("implied sigma^2  ", -2 * np.log(est.concentration))

# the Rayleigh test rejects uniformity for such a tight cluster
print("Rayleigh         ", rayleigh_test(angles))

# circular distance 1 - cos(a - b) is 0 for equal angles and 2 for opposite ones
print("distances        ", circular_distance([0.0, 0.0, 0.0], [0.0, np.pi / 2, np.pi]))
