"""Diffusion impact kernel: closed form, Laplace inversion and a finite wall.

The unbounded kernel has the closed form exp(t~) erfc(sqrt t~) / c, so it is
a good yardstick for the numerical inverter.  Adding an outer wall at x2
leaves a permanent impact 1/(c + x2) that only the inverter can produce.
"""

import numpy as np

from impactlab.kernels import DiffusionKernel, eval_kernel, kernel_asymptotics, step_response
from impactlab.laplace import invert_laplace

k = DiffusionKernel(c=1.0, kappa=1.0)
t = np.logspace(-2, 2, 5)

# invert the image 1/(c s + sqrt(kappa s)) and compare with the closed form
numeric = invert_laplace(lambda s: 1.0 / (k.c * s + np.sqrt(k.kappa * s)), t)
closed = eval_kernel(k, t)
print("t        K numeric          K closed           rel err")
for ti, a, b in zip(t, numeric, closed):
    print(f"{ti:<8g} {a:<18.12g} {b:<18.12g} {abs(a / b - 1):.1e}")

# a wall turns the decaying kernel into one with a permanent part
walled = DiffusionKernel(c=1.0, kappa=1.0, x2=2.0)
print("\nwith an outer wall at x2 = 2:")
print("  K(t) for t = 1, 10, 100:", eval_kernel(walled, [1.0, 10.0, 100.0], cross_check=True))
print("  permanent level 1/(c + x2) =", kernel_asymptotics(walled).permanent)

# constant-rate trading builds impact like sqrt(t) once t~ >> 1
S = step_response(k, [10.0, 40.0, 160.0])
print("\nstep response at t = 10, 40, 160:", S)
print("ratios as t quadruples (tend to 2):", S[1:] / S[:-1])
