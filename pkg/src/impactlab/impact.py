"""Impact and cost functionals for piecewise-constant trading profiles.

A :class:`RateProfile` is a signed trade measure: constant rates on the
intervals of a grid plus point trades (impulses).  Every quadratic quantity
here is the interaction energy

    W = 1/2 int int K(|t - s|) dmu(t) dmu(s)

evaluated exactly with the once- and twice-integrated kernel, so no double
quadrature is involved.  Cost per share is ``W / |Q|``; for a zero-net round
trip ``W`` itself is the cycle work, which is nonnegative for any positive
definite kernel.

Point trades carry half their self-impact, ``v**2 K(0) / 2``, which is what
the discrete cost sum assigns to its diagonal.

The Dirac kernel ``eta delta`` is read as the limit of causal kernels (an
exponential kernel with ``beta -> inf``), so its whole mass sits at lag
``0+`` and ``W = eta int q**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import (
    DeltaKernel,
    DiffusionKernel,
    KernelSpec,
    _diffusion_laplace,
    double_integral,
    eval_kernel,
    kernel_at_zero,
    step_response,
)
from .laplace import gamma_fn, invert_laplace

__all__ = [
    "RateProfile",
    "ImpactPath",
    "NetVolumeError",
    "ConstantPrice",
    "PowerPrice",
    "temporary_impact",
    "impact_path",
    "discrete_cost",
    "continuous_cost",
    "constant_rate_cost",
    "interaction_work",
    "round_trip_check",
    "rate_for_price_target",
    "target_rate_density",
    "random_zero_net_profile",
    "profile_scale",
    "arbitrage_sweep",
]


class NetVolumeError(ValueError):
    """A round-trip check was given a profile with nonzero net volume."""


@dataclass(frozen=True, eq=False)
class RateProfile:
    """Piecewise-constant trading rate plus point trades.

    ``rates[i]`` applies on ``[grid[i], grid[i+1])``.  ``impulses`` holds
    ``(time, volume)`` pairs.  Positive volume is selling into cash.
    """

    grid: np.ndarray
    rates: np.ndarray
    impulses: tuple = ()

    def __post_init__(self):
        grid = np.array(self.grid, dtype=float)
        rates = np.array(self.rates, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("grid needs at least two points")
        if rates.shape != (grid.size - 1,):
            raise ValueError("need exactly one rate per grid interval")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if not (np.all(np.isfinite(grid)) and np.all(np.isfinite(rates))):
            raise ValueError("grid and rates must be finite")
        impulses = tuple((float(t), float(v)) for t, v in self.impulses)
        if not all(math.isfinite(t) and math.isfinite(v) for t, v in impulses):
            raise ValueError("impulses must be finite")
        grid.setflags(write=False)
        rates.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "impulses", impulses)

    @classmethod
    def constant(cls, q: float, horizon: float, start: float = 0.0) -> RateProfile:
        return cls([start, start + horizon], [q])

    @classmethod
    def zero(cls, horizon: float = 1.0) -> RateProfile:
        return cls([0.0, horizon], [0.0])

    @property
    def starts(self) -> np.ndarray:
        return self.grid[:-1]

    @property
    def ends(self) -> np.ndarray:
        return self.grid[1:]

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.grid)

    @property
    def impulse_times(self) -> np.ndarray:
        return np.array([t for t, _ in self.impulses], dtype=float)

    @property
    def impulse_volumes(self) -> np.ndarray:
        return np.array([v for _, v in self.impulses], dtype=float)

    @property
    def volume(self) -> float:
        """Net traded volume ``Q``."""
        return float(np.dot(self.rates, self.widths) + self.impulse_volumes.sum())

    @property
    def abs_volume(self) -> float:
        return float(np.dot(np.abs(self.rates), self.widths) + np.abs(self.impulse_volumes).sum())

    @property
    def start(self) -> float:
        t0 = float(self.grid[0])
        return min([t0, *(t for t, _ in self.impulses)])

    def rate_at(self, t):
        """Rate in force at ``t`` (intervals are closed on the left)."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.grid, t, side="right") - 1
        inside = (idx >= 0) & (idx < self.rates.size)
        out = np.where(inside, self.rates[np.clip(idx, 0, self.rates.size - 1)], 0.0)
        return float(out) if out.ndim == 0 else out

    def scaled(self, a: float) -> RateProfile:
        return RateProfile(self.grid, a * self.rates, [(t, a * v) for t, v in self.impulses])

    def __add__(self, other: RateProfile) -> RateProfile:
        grid = np.union1d(self.grid, other.grid)
        mids = 0.5 * (grid[:-1] + grid[1:])
        rates = self.rate_at(mids) + other.rate_at(mids)
        return RateProfile(grid, rates, self.impulses + other.impulses)

    def __mul__(self, a: float) -> RateProfile:
        return self.scaled(a)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, RateProfile):
            return NotImplemented
        return (
            np.array_equal(self.grid, other.grid)
            and np.array_equal(self.rates, other.rates)
            and self.impulses == other.impulses
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ImpactPath:
    times: np.ndarray
    h_values: np.ndarray


def _clip(u):
    return np.maximum(np.asarray(u, dtype=float), 0.0)


def _unique_apply(func, k, u):
    """Evaluate ``func(k, u)`` once per distinct value of ``u``."""
    u = np.asarray(u, dtype=float)
    vals, inv = np.unique(u, return_inverse=True)
    return np.asarray(func(k, vals))[inv].reshape(u.shape)


def temporary_impact(p: RateProfile, k: KernelSpec, t):
    """Temporary impact ``h(t)`` of profile ``p`` under kernel ``k``.

    For the Dirac kernel this is ``eta q(t)``; point trades contribute
    nothing away from their own instant and are undefined at it.
    """
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    if np.any(t < p.start):
        raise ValueError("impact requested before the profile starts")

    if isinstance(k, DeltaKernel):
        if any(np.any(t == ti) for ti, v in p.impulses if v != 0.0):
            raise ValueError("impact of a point trade is undefined pointwise under the Dirac kernel")
        h = k.eta * np.atleast_1d(p.rate_at(t))
    else:
        tt = t[:, None]
        S_a = _unique_apply(step_response, k, _clip(tt - p.starts[None, :]))
        S_b = _unique_apply(step_response, k, _clip(tt - p.ends[None, :]))
        h = (S_a - S_b) @ p.rates
        for ti, v in p.impulses:
            after = t >= ti
            if np.any(after):
                h[after] += v * np.asarray(eval_kernel(k, t[after] - ti))
    return float(h[0]) if scalar else h


def impact_path(p: RateProfile, k: KernelSpec, times) -> ImpactPath:
    times = np.asarray(times, dtype=float)
    return ImpactPath(times, np.atleast_1d(temporary_impact(p, k, times)))


def interaction_work(p: RateProfile, k: KernelSpec) -> float:
    """``W = 1/2 int int K(|t-s|) dmu dmu`` for the profile's trade measure."""
    a, b, q = p.starts, p.ends, p.rates
    nz = q != 0.0
    a, b, q = a[nz], b[nz], q[nz]

    # ordered interval pairs: int_{I_i} dt int_{I_j} ds K(t - s) 1{s < t}
    G = lambda u: _unique_apply(double_integral, k, _clip(u))  # noqa: E731
    P = (
        G(b[:, None] - a[None, :])
        - G(b[:, None] - b[None, :])
        - G(a[:, None] - a[None, :])
        + G(a[:, None] - b[None, :])
    )
    work = float(q @ P @ q)

    if p.impulses:
        if isinstance(k, DeltaKernel):
            raise ValueError("point trades have unbounded self-impact under the Dirac kernel")
        ti, v = p.impulse_times, p.impulse_volumes
        S = lambda u: _unique_apply(step_response, k, _clip(u))  # noqa: E731
        cross = (
            S(b[:, None] - ti[None, :])
            - S(a[:, None] - ti[None, :])
            + S(ti[None, :] - a[:, None])
            - S(ti[None, :] - b[:, None])
        )
        work += float(q @ cross @ v)
        Kmat = _unique_apply(eval_kernel, k, np.abs(ti[:, None] - ti[None, :]))
        work += 0.5 * float(v @ Kmat @ v)
    return work


def continuous_cost(p: RateProfile, k: KernelSpec) -> float:
    """Cost per share ``W / |Q|``.

    A zero-net profile has no per-share cost; its signed cycle work ``W`` is
    returned instead (see :func:`round_trip_check`).
    """
    work = interaction_work(p, k)
    Q = p.volume
    if abs(Q) <= 1e-12 * max(1.0, p.abs_volume):
        return work
    return work / abs(Q)


def constant_rate_cost(q: float, T: float, k: KernelSpec) -> float:
    """Per-share cost of trading at rate ``q`` for ``T``: ``q K_{-2}(T) / T``."""
    if not (q > 0 and T > 0):
        raise ValueError("q and T must be positive")
    return q * float(double_integral(k, T)) / T


def discrete_cost(trades, k: KernelSpec) -> float:
    """Per-share cost of point trades: ``(1/2|Q|) sum_ij v_i v_j K(|t_i - t_j|)``."""
    if isinstance(k, DeltaKernel):
        raise ValueError(
            "discrete cost needs a finite K(0); use constant_rate_cost for the Dirac kernel"
        )
    trades = np.asarray(trades, dtype=float).reshape(-1, 2)
    if trades.shape[0] == 0:
        raise ValueError("need at least one trade")
    t, v = trades[:, 0], trades[:, 1]
    Q = v.sum()
    if Q == 0.0:
        raise ValueError("net traded volume is zero")
    lags = np.abs(t[:, None] - t[None, :])
    K = _unique_apply(eval_kernel, k, lags)
    return float(v @ K @ v) / (2.0 * abs(Q))


def round_trip_check(p: RateProfile, k: KernelSpec, tol: float = 1e-12) -> float:
    """Cycle work ``int h dq`` of a zero-net profile."""
    if abs(p.volume) > tol * max(1.0, p.abs_volume):
        raise NetVolumeError(f"round trip must have zero net volume, got {p.volume!r}")
    return interaction_work(p, k)


# --- rate for a price target ----------------------------------------------------


@dataclass(frozen=True)
class ConstantPrice:
    """Hold the price ``delta_s`` away from arrival from ``t = 0`` on."""

    delta_s: float

    @property
    def initial(self) -> float:
        return self.delta_s

    def laplace(self, s):
        return self.delta_s / s


@dataclass(frozen=True)
class PowerPrice:
    """Price path ``scale * t**alpha``."""

    alpha: float
    scale: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be > 0")

    @property
    def initial(self) -> float:
        return 0.0

    def laplace(self, s):
        return self.scale * gamma_fn(self.alpha + 1.0) / s ** (self.alpha + 1.0)


def _require_diffusion(k):
    if not isinstance(k, DiffusionKernel):
        raise TypeError("rate-for-price inversion is implemented for the diffusion kernel")


def target_rate_density(target, k: DiffusionKernel, t):
    """Closed-form trading rate (impulse excluded) for an unbounded diffusion kernel."""
    _require_diffusion(k)
    if k.bounded:
        raise ValueError("closed form needs an unbounded kernel")
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise ValueError("t must be > 0")
    if isinstance(target, ConstantPrice):
        out = target.delta_s * np.sqrt(k.kappa / (np.pi * t))
    else:
        a = target.alpha
        ratio = gamma_fn(a + 1.0) / gamma_fn(a + 0.5)
        out = target.scale * (
            k.c * a * t ** (a - 1.0) + math.sqrt(k.kappa) * t ** (a - 0.5) * ratio
        )
    return float(out) if out.ndim == 0 else out


def _closed_cumulative(target, k, t):
    t = np.asarray(t, dtype=float)
    if isinstance(target, ConstantPrice):
        return target.delta_s * 2.0 * np.sqrt(k.kappa * t / np.pi)
    a = target.alpha
    ratio = gamma_fn(a + 1.0) / gamma_fn(a + 0.5)
    return target.scale * (k.c * t**a + math.sqrt(k.kappa) * ratio * t ** (a + 0.5) / (a + 0.5))


def _laplace_cumulative(target, k, t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    c_h0 = k.c * target.initial

    # the inversion contour leaves the right half-plane, so the unchecked image
    def F(s):
        return (target.laplace(s) / _diffusion_laplace(k, s) - c_h0) / s

    out[pos] = invert_laplace(F, t[pos])
    return out


def rate_for_price_target(target, k: DiffusionKernel, grid, method: str = "auto") -> RateProfile:
    """Trading profile that holds the impact on ``target``.

    The rate on each grid interval is the exact interval average of the
    required rate, so traded volume is preserved.  A constant target also
    needs an opening point trade of ``c * delta_s``.  ``method='laplace'``
    solves ``q(s) = h(s) / K(s)`` numerically; ``'auto'`` uses the closed form
    for unbounded kernels and the Laplace route otherwise.
    """
    _require_diffusion(k)
    if not isinstance(target, (ConstantPrice, PowerPrice)):
        raise TypeError("target must be ConstantPrice or PowerPrice")
    grid = np.asarray(grid, dtype=float)
    if np.any(grid < 0):
        raise ValueError("grid must start at t >= 0")
    if method == "auto":
        method = "laplace" if k.bounded else "closed"
    if method == "closed":
        if k.bounded:
            raise ValueError("closed form needs an unbounded kernel")
        cum = _closed_cumulative(target, k, grid)
    elif method == "laplace":
        cum = _laplace_cumulative(target, k, grid)
    else:
        raise ValueError(f"unknown method {method!r}")

    rates = np.diff(cum) / np.diff(grid)
    impulse = k.c * target.initial
    impulses = [(float(grid[0]), impulse)] if impulse != 0.0 else []
    return RateProfile(grid, rates, impulses)


# --- no-dynamic-arbitrage sweep -------------------------------------------------


def random_zero_net_profile(
    rng: np.random.Generator, n_intervals: int = 16, horizon: float = 1.0
) -> RateProfile:
    """Uniform grid, i.i.d. U[-1, 1] rates, last rate set to close the position."""
    grid = np.linspace(0.0, horizon, n_intervals + 1)
    rates = rng.uniform(-1.0, 1.0, n_intervals)
    widths = np.diff(grid)
    rates[-1] = -np.dot(rates[:-1], widths[:-1]) / widths[-1]
    return RateProfile(grid, rates)


def profile_scale(p: RateProfile, k: KernelSpec) -> float:
    """Magnitude reference for cycle work: ``(abs volume)**2 * K(0)``."""
    k0 = kernel_at_zero(k)
    if not math.isfinite(k0):
        k0 = k.eta / float(p.widths.min())
    return p.abs_volume**2 * k0


def arbitrage_sweep(
    k: KernelSpec,
    n_profiles: int = 1000,
    seed: int = 0,
    n_intervals: int = 16,
    horizon: float = 1.0,
) -> np.ndarray:
    """Normalised cycle work ``W / scale`` for seeded random round trips."""
    rng = np.random.default_rng(seed)
    out = np.empty(n_profiles)
    for i in range(n_profiles):
        p = random_zero_net_profile(rng, n_intervals, horizon)
        out[i] = round_trip_check(p, k) / profile_scale(p, k)
    return out
