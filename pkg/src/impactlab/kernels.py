"""Impact kernel families.

All kernels are dimensionless: time in days, volume in fractions of ADV.
``MarketParams`` converts results to price units at the reporting layer.

Conventions
-----------
* ``ExponentialKernel`` is ``eta * beta * exp(-beta t)`` so its time integral
  is ``eta`` and ``beta -> inf`` recovers ``DeltaKernel(eta)``.
* ``DiffusionKernel`` is the full kernel; any impact prefactor is absorbed in
  ``c`` and ``kappa``.  ``x2 = inf`` gives the closed form
  ``exp(t~) erfc(sqrt(t~)) / c`` with ``t~ = kappa t / c**2``; a finite outer
  wall is inverted numerically from its Laplace image.
* ``DeltaKernel`` has no pointwise value; callers special-case it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import integrate

from .laplace import erfcx, invert_laplace

__all__ = [
    "DeltaKernel",
    "ExponentialKernel",
    "DiffusionKernel",
    "PowerKernel",
    "KernelSpec",
    "KernelAsymptotics",
    "TrivialAsymptoticsError",
    "MarketParams",
    "eval_kernel",
    "eval_kernel_laplace",
    "kernel_asymptotics",
    "step_response",
    "double_integral",
    "kernel_at_zero",
    "dimension_asymptote",
]


def _positive(name, value):
    if not (value > 0 and math.isfinite(value)):
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")


@dataclass(frozen=True)
class DeltaKernel:
    eta: float = 1.0

    def __post_init__(self):
        _positive("eta", self.eta)


@dataclass(frozen=True)
class ExponentialKernel:
    eta: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        _positive("eta", self.eta)
        _positive("beta", self.beta)


@dataclass(frozen=True)
class DiffusionKernel:
    """Wellbore-storage diffusion kernel.

    ``c`` is the storage coefficient (``K(0) = 1/c``), ``kappa`` the diffusion
    coefficient and ``x2`` the outer wall position (``math.inf`` for an
    unbounded reservoir, in which case the impact fully decays).
    """

    c: float = 1.0
    kappa: float = 1.0
    x2: float = math.inf

    def __post_init__(self):
        _positive("c", self.c)
        _positive("kappa", self.kappa)
        if not (self.x2 > 0):
            raise ValueError(f"x2 must be positive or inf, got {self.x2!r}")

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.x2)

    def reduced_time(self, t):
        """``t~ = kappa t / c**2``."""
        return self.kappa * np.asarray(t, dtype=float) / self.c**2


@dataclass(frozen=True)
class PowerKernel:
    """``c0 + c1 / (t0 + t)**alpha``."""

    c0: float = 0.0
    c1: float = 1.0
    t0: float = 1.0
    alpha: float = 0.5

    def __post_init__(self):
        if not (self.c0 >= 0 and math.isfinite(self.c0)):
            raise ValueError("c0 must be a nonnegative finite number")
        _positive("c1", self.c1)
        _positive("t0", self.t0)
        _positive("alpha", self.alpha)


KernelSpec = Union[DeltaKernel, ExponentialKernel, DiffusionKernel, PowerKernel]


class TrivialAsymptoticsError(ValueError):
    """Raised for kernels whose asymptotics carry no information."""


@dataclass(frozen=True)
class KernelAsymptotics:
    initial: float
    tail_law: str
    permanent: float


@dataclass(frozen=True)
class MarketParams:
    """Scaling constants between dimensionless results and market units.

    ``eta_tilde`` is the reduced impact coefficient ``eta sigma / (ADV S0)``.
    A dimensionless cost ``w`` maps to a relative price move ``eta_tilde * w``
    and to ``eta_tilde * w * s0`` in currency per share.
    """

    sigma: float
    s0: float
    adv: float
    eta_tilde: float

    def __post_init__(self):
        for name in ("sigma", "s0", "adv", "eta_tilde"):
            _positive(name, getattr(self, name))

    def volume_fraction(self, shares):
        return np.asarray(shares, dtype=float) / self.adv

    def relative_cost(self, value):
        return self.eta_tilde * np.asarray(value, dtype=float)

    def currency_cost(self, value):
        return self.relative_cost(value) * self.s0


def _times(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(~(t >= 0)):
        raise ValueError("time must be >= 0")
    return t


def _out(arr: np.ndarray):
    return float(arr) if arr.ndim == 0 else arr


def _stable_tanh(z):
    # Re(z) >= 0 on the principal branch; exp(-2z) underflows harmlessly.
    e = np.exp(-2.0 * z)
    return (1.0 - e) / (1.0 + e)


def _diffusion_laplace(k: DiffusionKernel, s):
    root = np.sqrt(s * k.kappa)
    if k.bounded:
        root = root * _stable_tanh(np.sqrt(s / k.kappa) * k.x2)
    return 1.0 / (k.c * s + root)


def _power_laplace_scalar(k: PowerKernel, s: complex) -> complex:
    a, w = s.real, s.imag

    def g(t):
        return np.exp(-a * t) * (k.t0 + t) ** (-k.alpha)

    if w == 0.0:
        re, _ = integrate.quad(g, 0, np.inf, epsabs=1e-13, epsrel=1e-11, limit=200)
        im = 0.0
    else:
        re, _ = integrate.quad(g, 0, np.inf, weight="cos", wvar=abs(w), epsabs=1e-13)
        im, _ = integrate.quad(g, 0, np.inf, weight="sin", wvar=abs(w), epsabs=1e-13)
        im = -math.copysign(im, w)
    return k.c0 / s + k.c1 * complex(re, im)


def eval_kernel_laplace(k: KernelSpec, s):
    """Laplace image ``K(s)`` for ``Re(s) > 0``.

    Vectorised for every family except ``PowerKernel``, whose image is
    computed point by point with adaptive oscillatory quadrature.
    """
    s = np.asarray(s, dtype=complex)
    if np.any(~(s.real > 0)):
        raise ValueError("Laplace variable must satisfy Re(s) > 0")
    if isinstance(k, DeltaKernel):
        out = np.full(s.shape, k.eta, dtype=complex)
    elif isinstance(k, ExponentialKernel):
        out = k.eta * k.beta / (s + k.beta)
    elif isinstance(k, DiffusionKernel):
        out = _diffusion_laplace(k, s)
    elif isinstance(k, PowerKernel):
        out = np.vectorize(lambda z: _power_laplace_scalar(k, complex(z)), otypes=[complex])(s)
    else:
        raise TypeError(f"unknown kernel {k!r}")
    return complex(out) if out.ndim == 0 else out


def _invert(k: DiffusionKernel, t: np.ndarray, power: int, cross_check=False) -> np.ndarray:
    """Invert ``K(s) / s**power`` at ``t``; zero where ``t == 0``."""
    out = np.zeros_like(t)
    pos = t > 0
    if np.any(pos):
        out[pos] = invert_laplace(
            lambda s: _diffusion_laplace(k, s) / s**power, t[pos], cross_check=cross_check
        )
    return out


def eval_kernel(k: KernelSpec, t, *, cross_check: bool = False):
    """Kernel value ``K(t)`` for ``t >= 0`` (scalar or array).

    ``cross_check`` verifies numeric Laplace inversions (finite-wall diffusion)
    against Gaver-Stehfest and raises ``InversionUnreliableError`` on
    disagreement.
    """
    t = _times(t)
    if isinstance(k, DeltaKernel):
        raise ValueError("Dirac kernel has no pointwise evaluation")
    if isinstance(k, ExponentialKernel):
        out = k.eta * k.beta * np.exp(-k.beta * t)
    elif isinstance(k, DiffusionKernel):
        if k.bounded:
            out = np.where(t > 0, 0.0, 1.0 / k.c)
            pos = t > 0
            if np.any(pos):
                out[pos] = _invert(k, t[pos], 0, cross_check)
        else:
            out = np.asarray(erfcx(np.sqrt(k.reduced_time(t)))) / k.c
    elif isinstance(k, PowerKernel):
        out = k.c0 + k.c1 * (k.t0 + t) ** (-k.alpha)
    else:
        raise TypeError(f"unknown kernel {k!r}")
    return _out(np.asarray(out, dtype=float))


def kernel_at_zero(k: KernelSpec) -> float:
    """``K(0)``; ``inf`` for the Dirac kernel."""
    if isinstance(k, DeltaKernel):
        return math.inf
    return float(eval_kernel(k, 0.0))


def kernel_asymptotics(k: KernelSpec) -> KernelAsymptotics:
    if isinstance(k, DiffusionKernel):
        if k.bounded:
            law = (
                "1/sqrt(pi*kappa*t) for 1 << t~ << x2**2, "
                "then levels off at 1/(c + x2)"
            )
            permanent = 1.0 / (k.c + k.x2)
        else:
            law = "1/sqrt(pi*kappa*t) for t~ >> 1"
            permanent = 0.0
        return KernelAsymptotics(1.0 / k.c, law, permanent)
    if isinstance(k, PowerKernel):
        return KernelAsymptotics(
            k.c0 + k.c1 * k.t0 ** (-k.alpha),
            f"c0 + c1*t**-{k.alpha:g} for t >> t0",
            k.c0,
        )
    raise TrivialAsymptoticsError(
        f"asymptotics are trivial for {type(k).__name__}: "
        "the kernel is a point mass or a pure exponential"
    )


def step_response(k: KernelSpec, t, *, cross_check: bool = False):
    """Impact of a unit constant rate: ``int_0^t K``."""
    t = _times(t)
    if isinstance(k, DeltaKernel):
        out = np.where(t > 0, k.eta, 0.0)
    elif isinstance(k, ExponentialKernel):
        out = -k.eta * np.expm1(-k.beta * t)
    elif isinstance(k, DiffusionKernel):
        out = _invert(k, t, 1, cross_check)
    elif isinstance(k, PowerKernel):
        a = k.alpha
        if a == 1.0:
            tail = np.log1p(t / k.t0)
        else:
            tail = ((k.t0 + t) ** (1 - a) - k.t0 ** (1 - a)) / (1 - a)
        out = k.c0 * t + k.c1 * tail
    else:
        raise TypeError(f"unknown kernel {k!r}")
    return _out(np.asarray(out, dtype=float))


def _x_plus_expm1(x):
    """``x + expm1(-x)`` without cancellation at small ``x``."""
    x = np.asarray(x, dtype=float)
    small = x < 1e-3
    series = x * x * (0.5 - x * (1 / 6 - x * (1 / 24 - x / 120)))
    return np.where(small, series, x + np.expm1(-np.where(small, 1.0, x)))


def double_integral(k: KernelSpec, t):
    """Twice-integrated kernel ``K_{-2}(t) = int_0^t int_0^u K``."""
    t = _times(t)
    if isinstance(k, DeltaKernel):
        out = k.eta * t
    elif isinstance(k, ExponentialKernel):
        out = k.eta * _x_plus_expm1(k.beta * t) / k.beta
    elif isinstance(k, DiffusionKernel):
        out = _invert(k, t, 2)
    elif isinstance(k, PowerKernel):
        a, t0 = k.alpha, k.t0
        if a == 1.0:
            tail = (t0 + t) * np.log1p(t / t0) - t
        elif a == 2.0:
            tail = t / t0 - np.log1p(t / t0)
        else:
            tail = ((t0 + t) ** (2 - a) - t0 ** (2 - a)) / ((1 - a) * (2 - a)) - t0 ** (
                1 - a
            ) * t / (1 - a)
        out = 0.5 * k.c0 * t * t + k.c1 * tail
    else:
        raise TypeError(f"unknown kernel {k!r}")
    return _out(np.asarray(out, dtype=float))


def dimension_asymptote(dimension: int, q: float, t: float) -> float:
    """Large-time impact of constant-rate trading in a ``dimension``-D medium.

    Up to a constant factor: ``q t**(1 - D/2)`` for ``D = 1``, ``q ln t`` for
    ``D = 2``; for ``D = 3`` the growth term decays and the impact levels off,
    so the flat trend ``q`` is returned.
    """
    if dimension not in (1, 2, 3):
        raise ValueError("spatial dimension must be 1, 2 or 3")
    if not t > 1:
        raise ValueError("asymptote needs t > 1")
    if dimension == 1:
        return q * math.sqrt(t)
    if dimension == 2:
        return q * math.log(t)
    return float(q)
