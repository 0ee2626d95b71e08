"""Optimal liquidation under a Dirac and an exponential kernel.

With a Dirac kernel the optimum is the familiar sinh-shaped path.  A finite
decay rate beta makes the trader open and close with block trades and
smooths the middle; as beta grows the blocks vanish and the two paths meet.
"""

import numpy as np

from impactlab.kernels import ExponentialKernel
from impactlab.trajectories import (
    TrajectoryProblem,
    ac_trajectory,
    euler_residual,
    exp_kernel_trajectory,
    urgency_from_risk,
)

lam = 4.0
t = np.linspace(0.0, 1.0, 401)
ac = ac_trajectory(TrajectoryProblem(1.0, 0.0, 1.0, k=urgency_from_risk(lam)), t)

print("beta      k         opening block  closing block  sup|x - x_ac|  euler residual")
for beta in (2.0, 10.0, 100.0, 1e4):
    k = urgency_from_risk(lam, beta)
    tr = exp_kernel_trajectory(TrajectoryProblem(1.0, 0.0, 1.0, k=k, beta=beta), t)
    gap = np.abs(tr.positions - ac).max()
    # the residual check needs grid steps well below the decay time 1/beta
    res = euler_residual(tr, ExponentialKernel(1.0, beta), lam) if beta * t[1] < 0.05 else float("nan")
    print(f"{beta:<9g} {k:<9.4f} {tr.jump_initial:<14.5f} {tr.jump_terminal:<14.5f} "
          f"{gap:<14.2e} {res:.1e}")

# with no risk aversion the path is two equal blocks and a straight line
beta = 8.0
rn = exp_kernel_trajectory(TrajectoryProblem(1.0, 0.0, 1.0, k=0.0, beta=beta), t)
print(f"\nrisk neutral, beta = {beta:g}: blocks {rn.jump_initial:.4f} and "
      f"{rn.jump_terminal:.4f}, 1/(beta T + 2) = {1 / (beta + 2):.4f}")
