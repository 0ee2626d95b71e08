"""Trading-regime experiments.

Three sweeps hold one of (time, volume, rate) fixed and vary the others:

* isochronic: horizon ``T`` fixed, number of equal child orders varies;
* isochoric: volume ``Q`` fixed, horizon halves repeatedly;
* isotachic: rate ``q`` fixed, horizon varies.

Each row carries the discrete cost (child orders at bin midpoints) and the
continuous constant-rate cost.  Units are dimensionless: days and fractions
of ADV.

Two diffusion calibrations are provided.  ``DEFAULT_KERNEL`` (``c = kappa =
1``) is the neutral default.  ``FIGURE_KERNEL`` (``kappa / c**2 = 1e4``) puts
half-day trading deep in the ``t~ >> 1`` regime; under it sixteen child
orders in half a day cost about 1.25 times one order.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Literal, NamedTuple, Sequence

import numpy as np

from .impact import constant_rate_cost
from .kernels import DeltaKernel, DiffusionKernel, KernelSpec, eval_kernel, kernel_at_zero

__all__ = [
    "DEFAULT_KERNEL",
    "FIGURE_KERNEL",
    "SweepConfig",
    "SweepRow",
    "SweepResult",
    "SlopeFit",
    "LawRow",
    "LawCheck",
    "isochronic_config",
    "isochoric_config",
    "isotachic_config",
    "run_sweep",
    "isochronic_sweep",
    "isochoric_sweep",
    "isotachic_sweep",
    "pool",
    "fit_loglog_slope",
    "default_law_configurations",
    "regime_law_check",
    "binary_tree_shortfall",
    "midpoint_trades",
    "uniform_discrete_cost",
    "kernel_params",
    "discrete_floor",
    "mixed_regime_experiment",
]

DEFAULT_KERNEL = DiffusionKernel(c=1.0, kappa=1.0)
FIGURE_KERNEL = DiffusionKernel(c=0.01, kappa=1.0)

Regime = Literal["isochronic", "isochoric", "isotachic"]
Mode = Literal["discrete", "continuous", "both"]

COLUMNS = ("rate", "volume", "time", "n_trades", "cost_discrete", "cost_continuous", "flag")


def kernel_params(k: KernelSpec) -> dict:
    d = {"family": type(k).__name__.removesuffix("Kernel").lower()}
    d.update(asdict(k))
    return d


@dataclass(frozen=True)
class SweepConfig:
    """One regime experiment.

    ``fixed_quantity`` is ``T`` (isochronic), ``Q`` (isochoric) or ``q``
    (isotachic).  ``steps`` are trade counts for the isochronic regime and
    horizons otherwise.
    """

    regime: Regime
    fixed_quantity: float
    steps: tuple
    kernel: KernelSpec = DEFAULT_KERNEL
    child_size: float = 1e-4
    mode: Mode = "both"
    participation_cap: float = 0.5

    def __post_init__(self):
        if self.regime not in ("isochronic", "isochoric", "isotachic"):
            raise ValueError(f"unknown regime {self.regime!r}")
        if self.mode not in ("discrete", "continuous", "both"):
            raise ValueError(f"unknown mode {self.mode!r}")
        steps = tuple(float(s) for s in self.steps)
        if not steps:
            raise ValueError("steps must be nonempty")
        if any(not (s > 0 and math.isfinite(s)) for s in steps):
            raise ValueError("steps must be positive")
        d = np.diff(steps)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("steps must be strictly monotone")
        if self.regime == "isochronic" and any(s != round(s) for s in steps):
            raise ValueError("isochronic steps are trade counts and must be integers")
        for name in ("fixed_quantity", "child_size", "participation_cap"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.mode != "continuous" and isinstance(self.kernel, DeltaKernel):
            raise ValueError("discrete mode needs a kernel with finite K(0)")
        object.__setattr__(self, "steps", steps)

    def to_dict(self) -> dict:
        return {
            "regime": self.regime,
            "fixed_quantity": self.fixed_quantity,
            "steps": list(self.steps),
            "kernel": kernel_params(self.kernel),
            "child_size": self.child_size,
            "mode": self.mode,
            "participation_cap": self.participation_cap,
        }


def isochronic_config(kernel: KernelSpec = DEFAULT_KERNEL, **kw) -> SweepConfig:
    """T = 0.5 day, child orders of 1e-4 ADV, N = 1, 2, 4, ..., 1024."""
    kw.setdefault("steps", tuple(2**i for i in range(11)))
    kw.setdefault("fixed_quantity", 0.5)
    return SweepConfig("isochronic", kernel=kernel, **kw)


def isochoric_config(kernel: KernelSpec = DEFAULT_KERNEL, halvings: int = 16, **kw) -> SweepConfig:
    """Q = 12e-4 ADV, T = 8 days halved ``halvings`` times."""
    kw.setdefault("steps", tuple(8.0 / 2**i for i in range(halvings + 1)))
    kw.setdefault("fixed_quantity", 12e-4)
    return SweepConfig("isochoric", kernel=kernel, **kw)


def isotachic_config(kernel: KernelSpec = DEFAULT_KERNEL, **kw) -> SweepConfig:
    """q = 0.1 ADV/day, T = 1, 2, 4, ..., 64 days."""
    kw.setdefault("steps", tuple(float(2**i) for i in range(7)))
    kw.setdefault("fixed_quantity", 0.1)
    return SweepConfig("isotachic", kernel=kernel, **kw)


class SweepRow(NamedTuple):
    rate: float
    volume: float
    time: float
    n_trades: int
    cost_discrete: float
    cost_continuous: float
    flag: str


@dataclass(frozen=True)
class SweepResult:
    rows: tuple
    metadata: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        if name not in COLUMNS[:-1]:
            raise KeyError(f"unknown column {name!r}")
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def __len__(self):
        return len(self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.rows:
            w.writerow([_fmt(v) for v in r])
        return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return ""
    return repr(v)


def midpoint_trades(n: int, horizon: float, child: float) -> np.ndarray:
    """``n`` equal trades at the midpoints of a uniform partition of ``[0, T]``."""
    times = (np.arange(n) + 0.5) * horizon / n
    return np.column_stack([times, np.full(n, child)])


def uniform_discrete_cost(n: int, horizon: float, child: float, k: KernelSpec) -> float:
    """Per-share cost of :func:`midpoint_trades`, in O(n).

    Equal trades on a uniform grid make the cost matrix Toeplitz, so
    ``sum_ij K(|i-j| h) = n K(0) + 2 sum_m (n - m) K(m h)``.
    """
    if isinstance(k, DeltaKernel):
        raise ValueError("discrete cost needs a finite K(0)")
    h = horizon / n
    m = np.arange(1, n)
    total = n * kernel_at_zero(k) + 2.0 * np.dot(n - m, np.atleast_1d(eval_kernel(k, m * h)))
    return float(child * child * total / (2.0 * n * child))


def _row(cfg: SweepConfig, q: float, Q: float, T: float, n: int) -> SweepRow:
    disc = cont = math.nan
    if cfg.mode in ("discrete", "both"):
        disc = uniform_discrete_cost(n, T, Q / n, cfg.kernel)
    if cfg.mode in ("continuous", "both"):
        cont = constant_rate_cost(q, T, cfg.kernel)
    flag = ""
    if q > cfg.participation_cap:
        flag = "participation_cap"
        warnings.warn(
            f"rate {q:g} ADV/day exceeds participation cap {cfg.participation_cap:g}",
            stacklevel=3,
        )
    return SweepRow(q, Q, T, n, disc, cont, flag)


def _trade_count(Q: float, child: float) -> int:
    n = round(Q / child)
    return max(1, n)


def _result(cfg: SweepConfig, rows) -> SweepResult:
    return SweepResult(tuple(rows), {"config": cfg.to_dict(), "seed": 0})


def isochronic_sweep(cfg: SweepConfig) -> SweepResult:
    if cfg.regime != "isochronic":
        raise ValueError("config is not isochronic")
    T = cfg.fixed_quantity
    rows = []
    for n in cfg.steps:
        n = int(n)
        Q = n * cfg.child_size
        rows.append(_row(cfg, Q / T, Q, T, n))
    return _result(cfg, rows)


def isochoric_sweep(cfg: SweepConfig) -> SweepResult:
    if cfg.regime != "isochoric":
        raise ValueError("config is not isochoric")
    Q = cfg.fixed_quantity
    n = _trade_count(Q, cfg.child_size)
    return _result(cfg, [_row(cfg, Q / T, Q, T, n) for T in cfg.steps])


def isotachic_sweep(cfg: SweepConfig) -> SweepResult:
    if cfg.regime != "isotachic":
        raise ValueError("config is not isotachic")
    q = cfg.fixed_quantity
    rows = []
    for T in cfg.steps:
        Q = q * T
        rows.append(_row(cfg, q, Q, T, _trade_count(Q, cfg.child_size)))
    return _result(cfg, rows)


def run_sweep(cfg: SweepConfig) -> SweepResult:
    return {
        "isochronic": isochronic_sweep,
        "isochoric": isochoric_sweep,
        "isotachic": isotachic_sweep,
    }[cfg.regime](cfg)


def pool(*results: SweepResult) -> SweepResult:
    """Concatenate sweeps (e.g. to mimic a dataset mixing regimes)."""
    rows = tuple(r for res in results for r in res.rows)
    return SweepResult(rows, {"pooled": [res.metadata for res in results]})


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    max_residual: float
    n: int


def fit_loglog_slope(
    result: SweepResult,
    column: str = "cost_continuous",
    x: str = "rate",
    range: tuple[float, float] | None = None,
) -> SlopeFit:
    """Least-squares slope of ``log(column)`` against ``log(x)``.

    ``range`` restricts the rows to ``lo <= x <= hi``.
    """
    xs, ys = result.column(x), result.column(column)
    keep = ~np.isnan(ys)
    if range is not None:
        lo, hi = range
        keep &= (xs >= lo) & (xs <= hi)
    xs, ys = xs[keep], ys[keep]
    if xs.size < 3:
        raise ValueError("need at least 3 rows to fit a slope")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("log-log fit needs positive values")
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = np.abs(ly - (slope * lx + intercept)).max()
    return SlopeFit(float(slope), float(intercept), float(resid), int(xs.size))


# --- three-regime law -----------------------------------------------------------


class LawRow(NamedTuple):
    family: str
    rate: float
    volume: float
    time: float
    reduced_time: float
    cost: float
    C: float
    asymptotic: bool


@dataclass(frozen=True)
class LawCheck:
    rows: tuple
    ratio: float  # max/min C over rows in the asymptotic regime

    def constants(self) -> np.ndarray:
        return np.array([r.C for r in self.rows if r.asymptotic])


def default_law_configurations() -> list[tuple[str, float, float]]:
    """``(family, q, T)`` triples: T fixed, Q fixed and q fixed, four each."""
    out = []
    for q in (0.05, 0.1, 0.2, 0.4):
        out.append(("time_fixed", q, 1.0))
    for T in (1.0, 2.0, 4.0, 8.0):
        out.append(("volume_fixed", 0.4 / T, T))
    for T in (1.0, 2.0, 4.0, 8.0):
        out.append(("rate_fixed", 0.1, T))
    return out


def regime_law_check(
    kernel: DiffusionKernel = FIGURE_KERNEL,
    configurations: Sequence[tuple[str, float, float]] | None = None,
    sigma: float = 1.0,
    threshold: float = 1e3,
) -> LawCheck:
    """``C = cost / (sigma sqrt(T) q)`` for each configuration.

    Rows with reduced time ``kappa T / c**2`` below ``threshold`` are outside
    the asymptotic regime; they are reported but left out of ``ratio``.
    """
    if not isinstance(kernel, DiffusionKernel):
        raise TypeError("the regime law is stated for the diffusion kernel")
    if configurations is None:
        configurations = default_law_configurations()
    rows = []
    for family, q, T in configurations:
        cost = constant_rate_cost(q, T, kernel)
        tr = float(kernel.reduced_time(T))
        C = cost / (sigma * math.sqrt(T) * q)
        rows.append(LawRow(family, q, q * T, T, tr, cost, C, tr >= threshold))
    Cs = np.array([r.C for r in rows if r.asymptotic])
    ratio = float(Cs.max() / Cs.min()) if Cs.size else math.nan
    return LawCheck(tuple(rows), ratio)


# --- binary tree ----------------------------------------------------------------


def binary_tree_shortfall(policy: Literal["market", "limit"], p_up: float = 0.5) -> float:
    """Expected shortfall in ticks of a one-lot buy on a +-1 tick binary tree.

    A market order pays half the spread.  A limit order at the bid gains half
    a spread on a down-move and is re-pegged one tick higher on an up-move,
    so ``W = p_down * 0.5 + p_up * (W - 1)``.
    """
    if policy == "market":
        if not 0.0 < p_up < 1.0:
            raise ValueError("p_up must lie in (0, 1)")
        return -0.5
    if policy != "limit":
        raise ValueError(f"unknown policy {policy!r}")
    if p_up == 1.0:
        raise ValueError("limit-order recursion diverges when the price only goes up")
    if not 0.0 < p_up < 1.0:
        raise ValueError("p_up must lie in (0, 1)")
    p_down = 1.0 - p_up
    return (0.5 * p_down - p_up) / (1.0 - p_up)


def discrete_floor(cfg: SweepConfig) -> float:
    """Cost of one isolated child order, ``child K(0) / 2``."""
    return 0.5 * cfg.child_size * kernel_at_zero(cfg.kernel)


def mixed_regime_experiment(
    kernel: DiffusionKernel = FIGURE_KERNEL,
    horizon: float = 0.5,
    threshold: float = 1e3,
) -> tuple[SweepResult, SlopeFit]:
    """Pool an isochronic and an isochoric sweep and fit one exponent.

    The isochoric volume is chosen so the two continuous cost curves cross
    in the middle of their common rate range; only rows in the asymptotic
    regime (reduced time >= ``threshold``) and inside that range are kept.
    A fit over such a mixture lands between the pure exponents 1/2 and 1.
    """
    chron = run_sweep(isochronic_config(kernel, fixed_quantity=horizon, mode="continuous"))
    q_chron = chron.column("rate")
    q_mid = math.sqrt(q_chron.min() * q_chron.max())
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        choric = run_sweep(
            isochoric_config(kernel, fixed_quantity=q_mid * horizon, mode="continuous")
        )
    choric_rows = [r for r in choric.rows if kernel.reduced_time(r.time) >= threshold]
    lo = max(q_chron.min(), min(r.rate for r in choric_rows))
    hi = min(q_chron.max(), max(r.rate for r in choric_rows))
    rows = [r for r in chron.rows if lo <= r.rate <= hi]
    rows += [r for r in choric_rows if lo <= r.rate <= hi]
    pooled = SweepResult(
        tuple(rows), {"pooled": [chron.metadata, choric.metadata], "rate_range": [lo, hi]}
    )
    return pooled, fit_loglog_slope(pooled)
