"""No free round trips, and the schedule that pins the price.

Any buy-then-sell cycle costs nonnegative work under a diffusion kernel.
Conversely, to hold the impact at a fixed level the trader fires an opening
block of c * delta_s and then trades at a rate decaying like 1/sqrt(t).
"""

import numpy as np

from impactlab.impact import (
    ConstantPrice,
    arbitrage_sweep,
    rate_for_price_target,
    temporary_impact,
)
from impactlab.kernels import DiffusionKernel

k = DiffusionKernel(c=1.0, kappa=1.0)

w = arbitrage_sweep(k, n_profiles=200, seed=1)
print(f"200 random round trips: min scaled work {w.min():.3e}, median {np.median(w):.3e}")

grid = np.concatenate(([0.0], np.geomspace(1e-6, 200.0, 800)))
p = rate_for_price_target(ConstantPrice(1.0), k, grid)
print("opening block:", p.impulses[0])
t = np.array([0.5, 1.0, 10.0, 100.0])
print("impact at t =", t, "->", temporary_impact(p, k, t).round(6))
print("rate on the first and last intervals:", p.rates[[1, -1]])
