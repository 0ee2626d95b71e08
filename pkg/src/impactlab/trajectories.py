"""Closed-form optimal liquidation paths.

``ac_trajectory`` is the Dirac-kernel (GKAC) sinh solution.  For the
exponential kernel ``eta beta exp(-beta t)`` the optimal path is a sinh arc
with jumps at both ends; jumps are carried as data, never as steep grid
segments.

The risk parameter ``lam`` is measured relative to the kernel scale (take
``eta = 1``).  The Euler equation used throughout is::

    2 lam x(t) = d/dt int_0^T xdot(tau) K(|t - tau|) dtau

under which the Dirac kernel gives ``x'' = lam x`` and the exponential kernel
gives urgency ``k**2 = lam beta**2 / (lam + beta**2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import DeltaKernel, KernelSpec, eval_kernel

__all__ = [
    "TrajectoryProblem",
    "Trajectory",
    "urgency_from_risk",
    "risk_from_urgency",
    "ac_trajectory",
    "exp_kernel_trajectory",
    "risk_neutral_exp_trajectory",
    "euler_residual",
]

_SERIES_KT = 1e-6


@dataclass(frozen=True)
class TrajectoryProblem:
    """Liquidation from ``x0`` to ``xT`` over ``horizon`` days.

    ``k`` is the urgency (1/day).  ``beta`` is the exponential kernel's decay
    rate and is only needed by the exponential-kernel solutions.
    """

    x0: float
    xT: float
    horizon: float
    k: float = 0.0
    beta: float | None = None

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError("horizon must be > 0")
        if not self.k >= 0:
            raise ValueError("urgency k must be >= 0")
        if self.beta is not None and not self.beta > 0:
            raise ValueError("beta must be > 0")

    @property
    def lam(self) -> float:
        """Risk parameter consistent with ``k`` (and ``beta`` if set)."""
        if self.beta is None:
            return self.k**2
        return risk_from_urgency(self.k, self.beta)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled path.

    ``positions[0]`` is the value just after the initial jump and
    ``positions[-1]`` just before the terminal one, so
    ``positions[0] == x0 - jump_initial`` and
    ``positions[-1] == xT + jump_terminal``.
    """

    times: np.ndarray
    positions: np.ndarray
    jump_initial: float = 0.0
    jump_terminal: float = 0.0

    @property
    def x0(self) -> float:
        return float(self.positions[0] + self.jump_initial)

    @property
    def xT(self) -> float:
        return float(self.positions[-1] - self.jump_terminal)

    def trading_rate(self) -> np.ndarray:
        """``q = -dx/dt`` on the grid, excluding the jumps."""
        return -np.gradient(self.positions, self.times)


def urgency_from_risk(lam: float, beta: float | None = None) -> float:
    """``k`` from the risk parameter: ``sqrt(lam)`` or ``sqrt(lam b^2/(lam + b^2))``."""
    if lam < 0:
        raise ValueError("lam must be >= 0")
    if beta is None or math.isinf(beta):
        return math.sqrt(lam)
    return beta * math.sqrt(lam / (lam + beta * beta))


def risk_from_urgency(k: float, beta: float) -> float:
    if not beta > k:
        raise ValueError("parameter regime invalid: need beta > k")
    return (k * beta) ** 2 / (beta * beta - k * k)


def _check_times(p: TrajectoryProblem, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any((t < 0) | (t > p.horizon)):
        raise ValueError(f"t must lie in [0, {p.horizon}]")
    return t


def _sinh_ratio(k, num, den):
    """``sinh(k num) / sinh(k den)`` with the k -> 0 limit handled by series."""
    kd = k * den
    if kd < _SERIES_KT:
        # sinh(a)/sinh(b) = (a/b)(1 + (a^2 - b^2)/6 + O(k^4))
        a2 = (k * num) ** 2
        return num / den * (1.0 + (a2 - kd * kd) / 6.0)
    return np.sinh(k * num) / np.sinh(kd)


def ac_trajectory(p: TrajectoryProblem, t):
    """GKAC optimal position ``x(t)``; linear when ``k = 0``."""
    t = _check_times(p, t)
    T = p.horizon
    x = p.x0 * _sinh_ratio(p.k, T - t, T) + p.xT * _sinh_ratio(p.k, t, T)
    return float(x) if x.ndim == 0 else x


def _exp_jumps(p: TrajectoryProblem) -> tuple[float, float]:
    d = (p.x0 - p.xT) / (p.beta * p.horizon + 2.0)
    return d, d


def risk_neutral_exp_trajectory(p: TrajectoryProblem, t):
    """Risk-neutral (lam -> 0) exponential-kernel path, jumps excluded.

    ``(x0 - d)(T - t)/T + (xT + d) t/T`` with ``d = (x0 - xT)/(beta T + 2)``.
    """
    if p.beta is None:
        raise ValueError("beta is required for the exponential kernel")
    t = _check_times(p, t)
    T = p.horizon
    d0, dT = _exp_jumps(p)
    x = (p.x0 - d0) * (T - t) / T + (p.xT + dT) * t / T
    return float(x) if x.ndim == 0 else x


def exp_kernel_trajectory(p: TrajectoryProblem, t) -> Trajectory:
    """Optimal path under the exponential kernel.

    Interior::

        x(t) = B [x0 sinh(k(T-t) + A) + xT sinh(kt + A)] / sinh(kT + 2A)

    with ``A = artanh(k/beta)`` and ``B = k / sqrt(lam) = sqrt(1 - (k/beta)**2)``.
    The jumps are the gaps between ``x0``/``xT`` and the interior path at the
    ends.  ``t`` must be a grid covering ``[0, T]`` (or any points inside it;
    jumps are reported regardless).
    """
    if p.beta is None:
        raise ValueError("beta is required for the exponential kernel")
    if not p.beta > p.k:
        raise ValueError("parameter regime invalid: need beta > k")
    t = np.atleast_1d(_check_times(p, t))
    T, k, beta = p.horizon, p.k, p.beta

    if k == 0.0:
        x = risk_neutral_exp_trajectory(p, t)
        x = np.atleast_1d(x)
        start, end = risk_neutral_exp_trajectory(p, 0.0), risk_neutral_exp_trajectory(p, T)
    else:
        ratio = k / beta
        A = math.atanh(ratio)
        B = math.sqrt((1.0 - ratio) * (1.0 + ratio))
        den = math.sinh(k * T + 2.0 * A)

        def path(tt):
            return B * (p.x0 * np.sinh(k * (T - tt) + A) + p.xT * np.sinh(k * tt + A)) / den

        x = path(t)
        start, end = float(path(0.0)), float(path(T))

    return Trajectory(
        times=t,
        positions=np.asarray(x, dtype=float),
        jump_initial=float(p.x0 - start),
        jump_terminal=float(end - p.xT),
    )


def euler_residual(traj: Trajectory, kernel: KernelSpec, lam: float) -> float:
    """Max-norm residual of the Euler equation on interior grid points.

    The convolution is integrated with the trapezoid rule over the grid
    (jumps enter analytically as point trades) and both derivatives use
    central differences.  For the Dirac kernel ``eta delta`` the convolution
    collapses to ``2 eta xdot`` and the right side becomes ``2 eta x''``.
    The result is scaled by ``|x0 - xT|``.
    """
    t = np.asarray(traj.times, dtype=float)
    x = np.asarray(traj.positions, dtype=float)
    if t.ndim != 1 or t.size < 66:
        raise ValueError("grid too coarse: need at least 64 interior points")
    h = np.diff(t)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0):
        raise ValueError("euler_residual needs a uniform grid")

    if isinstance(kernel, DeltaKernel):
        rhs = np.zeros_like(x)
        rhs[1:-1] = 2.0 * kernel.eta * (x[2:] - 2.0 * x[1:-1] + x[:-2]) / h[0] ** 2
    else:
        xdot = np.gradient(x, t, edge_order=2)
        lags = np.abs(t[:, None] - t[None, :])
        K = eval_kernel(kernel, lags)
        conv = np.trapezoid(xdot[None, :] * K, t, axis=1)
        T = t[-1] - t[0]
        conv = conv - traj.jump_initial * eval_kernel(kernel, t - t[0])
        conv = conv - traj.jump_terminal * eval_kernel(kernel, T - (t - t[0]))
        rhs = np.gradient(conv, t)

    resid = np.abs(2.0 * lam * x - rhs)[1:-1]
    scale = abs(traj.x0 - traj.xT)
    if scale == 0.0:
        return float(resid.max())
    return float(resid.max() / scale)
