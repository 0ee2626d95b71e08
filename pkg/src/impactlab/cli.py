"""Command-line entry point.

Every subcommand prints its CSV to stdout.  With ``--out DIR`` it also writes
``<command>.csv``, ``<command>.svg`` (with ``--plot``) and ``manifest.json``
into ``DIR``; ``impactlab rerun DIR/manifest.json`` replays the recorded
configuration.

Options may also come from ``--config FILE``, a flat text file of
``key = value`` lines (``#`` starts a comment).  Keys are the long flag names
with or without the leading dashes; ``-`` and ``_`` are interchangeable.
Flags given on the command line override the file.

Exit status: 0 on success, 2 on invalid input, 1 when a numerical result is
unreliable (Laplace inversion cross-check, failed self-test, arbitrage
violation).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .csvio import read_manifest, read_profile, read_trades, rows_to_csv, write_manifest, write_text
from .csvio import profile_to_csv
from .impact import (
    ConstantPrice,
    PowerPrice,
    arbitrage_sweep,
    constant_rate_cost,
    continuous_cost,
    discrete_cost,
    impact_path,
    interaction_work,
    rate_for_price_target,
)
from .kernels import (
    DeltaKernel,
    DiffusionKernel,
    ExponentialKernel,
    PowerKernel,
    eval_kernel,
    step_response,
)
from .laplace import InversionUnreliableError, selftest
from .plot import emit_plot
from .regimes import (
    FIGURE_KERNEL,
    SweepConfig,
    binary_tree_shortfall,
    isochoric_config,
    isochronic_config,
    isotachic_config,
    kernel_params,
    regime_law_check,
    run_sweep,
)
from .trajectories import (
    TrajectoryProblem,
    ac_trajectory,
    exp_kernel_trajectory,
    risk_neutral_exp_trajectory,
    urgency_from_risk,
)

__all__ = ["main", "build_parser", "parse_steps", "parse_list", "load_config_file"]

SEED_ENV = "IMPACTLAB_SEED"
# keys never recorded in a manifest
_PLUMBING = ("command", "config", "out", "handler")
_RESOLVED = "kernel_resolved"


class UsageError(ValueError):
    pass


class Unreliable(RuntimeError):
    """Numerical check failed; maps to exit status 1."""


# --- argument helpers -------------------------------------------------------------


def parse_list(text) -> list[float]:
    """``"0,0.5,1"`` -> ``[0.0, 0.5, 1.0]``."""
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        out = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"not a comma-separated list of numbers: {text!r}") from None
    if not out:
        raise UsageError("empty list")
    return out


def parse_steps(text) -> list[float]:
    """Step list: ``"a,b,c"``, ``"start:stop:xF"`` (geometric) or ``"start:stop:+d"``.

    Geometric and arithmetic ranges include ``stop`` when it is hit to within
    rounding; ``F`` may be below 1 for a decreasing sequence.
    """
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    text = str(text).strip()
    if ":" not in text:
        return parse_list(text)
    parts = text.split(":")
    if len(parts) != 3 or not parts[2] or parts[2][0] not in "x+":
        raise UsageError(f"bad step range {text!r}; use start:stop:xF or start:stop:+d")
    try:
        start, stop, inc = float(parts[0]), float(parts[1]), float(parts[2][1:])
    except ValueError:
        raise UsageError(f"bad step range {text!r}") from None
    geometric = parts[2][0] == "x"
    if geometric and not (inc > 0 and inc != 1):
        raise UsageError("geometric factor must be positive and not 1")
    if not geometric and inc == 0:
        raise UsageError("arithmetic increment must be nonzero")
    out, v = [], start
    tol = 1e-9 * max(abs(start), abs(stop))
    rising = (inc > 1) if geometric else (inc > 0)
    while (v <= stop + tol) if rising else (v >= stop - tol):
        out.append(v)
        v = v * inc if geometric else v + inc
        if len(out) > 100_000:
            raise UsageError("step range too long")
    if not out:
        raise UsageError(f"step range {text!r} is empty")
    return out


def _add_kernel_args(p, default_family="diffusion", c=None):
    g = p.add_argument_group("kernel")
    g.add_argument("--family", "--kernel", dest="family", default=default_family,
                   choices=("delta", "exponential", "diffusion", "power"))
    g.add_argument("--c", type=float, default=c, help="diffusion storage coefficient, K(0) = 1/c")
    g.add_argument("--kappa", type=float, help="diffusion coefficient")
    g.add_argument("--x2", type=float, help="outer wall (default: unbounded)")
    g.add_argument("--eta", type=float, help="delta / exponential strength")
    g.add_argument("--beta", type=float, help="exponential decay rate [1/day]")
    g.add_argument("--c0", type=float, help="power-law permanent part")
    g.add_argument("--c1", type=float, help="power-law amplitude")
    g.add_argument("--t0", type=float, help="power-law offset [days]")
    g.add_argument("--alpha", type=float, help="power-law exponent")


_KERNEL_FIELDS = {
    "delta": (DeltaKernel, ("eta",)),
    "exponential": (ExponentialKernel, ("eta", "beta")),
    "diffusion": (DiffusionKernel, ("c", "kappa", "x2")),
    "power": (PowerKernel, ("c0", "c1", "t0", "alpha")),
}


def kernel_from_args(a):
    cls, fields = _KERNEL_FIELDS[a.family]
    kw = {f: getattr(a, f) for f in fields if getattr(a, f, None) is not None}
    return cls(**kw)


def _common(p):
    p.add_argument("--out", help="output directory for CSV, SVG and manifest")
    p.add_argument("--plot", action="store_true", help="also write an SVG plot (needs --out)")
    p.add_argument("--config", help="flat key = value configuration file")


# --- subcommands ------------------------------------------------------------------


def cmd_kernel(a):
    k = kernel_from_args(a)
    t = np.array(parse_list(a.t))
    K = np.atleast_1d(eval_kernel(k, t, cross_check=a.cross_check))
    S = np.atleast_1d(step_response(k, t, cross_check=a.cross_check))
    csv = rows_to_csv(("t", "K", "step_response"), zip(t.tolist(), K.tolist(), S.tolist()))
    return csv, lambda: emit_plot({"K": (t, K), "step_response": (t, S)}, xlabel="time t [days]",
                                  ylabel="kernel value [dimensionless]")


def cmd_invlap(a):
    if a.action != "selftest":
        raise UsageError("invlap supports only 'selftest'")
    rows = selftest()
    keys = ("pair", "t", "exact", "talbot", "gaver_stehfest",
            "rel_err_talbot", "rel_err_gaver_stehfest", "passed")
    csv = rows_to_csv(keys, ([r[k] for k in keys] for r in rows))
    failed = [r for r in rows if not r["passed"]]
    if failed:
        return csv, None, f"{len(failed)} of {len(rows)} transform-pair checks failed"
    return csv, None


def cmd_trajectory(a):
    if a.points < 2:
        raise UsageError("--points must be >= 2")
    if a.k is not None and a.lam is not None:
        raise UsageError("give --k or --lam, not both")
    beta = a.beta if a.kind != "ac" else None
    if a.kind != "ac" and beta is None:
        raise UsageError(f"--beta is required for --kind {a.kind}")
    k = a.k if a.k is not None else urgency_from_risk(a.lam or 0.0, beta)
    p = TrajectoryProblem(a.x0, a.xT, a.horizon, k=k, beta=beta)
    t = np.linspace(0.0, a.horizon, a.points)
    if a.kind == "ac":
        x, j0, jT = np.asarray(ac_trajectory(p, t)), 0.0, 0.0
    elif a.kind == "exp":
        tr = exp_kernel_trajectory(p, t)
        x, j0, jT = tr.positions, tr.jump_initial, tr.jump_terminal
    else:
        x = np.asarray(risk_neutral_exp_trajectory(p, t))
        j0, jT = p.x0 - x[0], x[-1] - p.xT
    ts, xs = t.tolist(), x.tolist()
    # jumps appear as two rows at the same time
    if j0 != 0.0:
        ts, xs = [0.0] + ts, [p.x0] + xs
    if jT != 0.0:
        ts, xs = ts + [a.horizon], xs + [p.xT]
    csv = rows_to_csv(("t", "x"), zip(ts, xs))
    return csv, lambda: emit_plot({"x": (ts, xs)}, xlabel="time t [days]",
                                  ylabel="position x [ADV]")


def _times_for(a, horizon):
    if a.t is not None:
        return np.array(parse_list(a.t))
    if a.points < 2:
        raise UsageError("--points must be >= 2")
    return np.linspace(0.0, horizon, a.points)


def cmd_impact(a):
    if not a.profile:
        raise UsageError("--profile is required")
    prof = read_profile(a.profile)
    k = kernel_from_args(a)
    end = float(prof.grid[-1])
    path = impact_path(prof, k, _times_for(a, a.until if a.until is not None else 2.0 * end))
    csv = rows_to_csv(("t", "h"), zip(path.times.tolist(), np.atleast_1d(path.h_values).tolist()))
    return csv, lambda: emit_plot(path)


def cmd_cost(a):
    k = kernel_from_args(a)
    given = sum(x is not None for x in (a.profile, a.trades, a.q))
    if given != 1:
        raise UsageError("give exactly one of --profile, --trades or --q")
    header = ("source", "volume", "work", "cost")
    if a.profile:
        prof = read_profile(a.profile)
        row = ("profile", prof.volume, interaction_work(prof, k), continuous_cost(prof, k))
    elif a.trades:
        tr = read_trades(a.trades)
        Q = float(tr[:, 1].sum())
        c = discrete_cost(tr, k)
        row = ("trades", Q, c * abs(Q), c)
    else:
        if a.horizon is None:
            raise UsageError("--q needs --horizon")
        c = constant_rate_cost(a.q, a.horizon, k)
        row = ("constant_rate", a.q * a.horizon, c * abs(a.q * a.horizon), c)
    return rows_to_csv(header, [row]), None


def cmd_rate_for_price(a):
    k = kernel_from_args(a)
    if a.target == "constant":
        target = ConstantPrice(a.delta_s)
    else:
        target = PowerPrice(a.power, a.scale)
    if a.intervals < 1:
        raise UsageError("--intervals must be >= 1")
    if a.grid == "uniform":
        grid = np.linspace(0.0, a.horizon, a.intervals + 1)
    else:
        lo = a.horizon * 1e-8
        grid = np.concatenate(([0.0], np.geomspace(lo, a.horizon, a.intervals)))
    prof = rate_for_price_target(target, k, grid, method=a.method)
    return profile_to_csv(prof), lambda: emit_plot(impact_path(prof, k, grid[1:]))


def cmd_arbitrage_check(a):
    k = kernel_from_args(a)
    seed = a.seed
    if seed is None:
        env = os.environ.get(SEED_ENV)
        try:
            seed = int(env) if env else 0
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    w = arbitrage_sweep(k, n_profiles=a.n_profiles, seed=seed, n_intervals=a.intervals,
                        horizon=a.horizon)
    ok = w >= -a.tol
    csv = rows_to_csv(("index", "scaled_work", "passed"), zip(range(len(w)), w.tolist(), ok.tolist()))
    if not ok.all():
        return csv, None, f"{int((~ok).sum())} round trips produced negative work (seed {seed})"
    return csv, None


_SWEEP_BUILDERS = {
    "isochronic": isochronic_config,
    "isochoric": isochoric_config,
    "isotachic": isotachic_config,
}


def cmd_sweep(a):
    k = kernel_from_args(a)
    kw = {"mode": a.mode, "child_size": a.child_size, "participation_cap": a.cap}
    if a.fixed is not None:
        kw["fixed_quantity"] = a.fixed
    if a.steps is not None:
        kw["steps"] = tuple(parse_steps(a.steps))
    cfg: SweepConfig = _SWEEP_BUILDERS[a.regime](k, **kw)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = run_sweep(cfg)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return res.to_csv(), lambda: emit_plot(res, title=f"{a.regime} sweep")


def cmd_law_check(a):
    rows = []
    for kappa in parse_list(a.kappas):
        chk = regime_law_check(DiffusionKernel(a.c, kappa), sigma=a.sigma, threshold=a.threshold)
        for r in chk.rows:
            rows.append((kappa,) + tuple(r))
        C = chk.constants()
        print(f"kappa={kappa!r}: C max/min = {chk.ratio:.6f}, "
              f"mean C*sqrt(kappa) = {C.mean() * math.sqrt(kappa):.6f}", file=sys.stderr)
    header = ("kappa", "family", "rate", "volume", "time", "reduced_time", "cost", "C", "asymptotic")
    return rows_to_csv(header, rows), None


def cmd_binary_tree(a):
    v = binary_tree_shortfall(a.policy, a.p_up)
    return rows_to_csv(("policy", "p_up", "shortfall"), [(a.policy, a.p_up, v)]), None


# --- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="impactlab", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"impactlab {__version__}")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND")
    subs = {}

    def add(name, handler, help):
        p = sub.add_parser(name, help=help, description=help)
        p.set_defaults(handler=handler)
        subs[name] = p
        return p

    p = add("kernel", cmd_kernel, "tabulate K(t) and its step response")
    _add_kernel_args(p)
    p.add_argument("--t", default="0,0.5,1,2,5,10", help="comma-separated times [days]")
    p.add_argument("--cross-check", action="store_true",
                   help="verify numeric inversions against Gaver-Stehfest")
    _common(p)

    p = add("invlap", cmd_invlap, "Laplace inversion self-test on known transform pairs")
    p.add_argument("action", nargs="?", default="selftest", choices=("selftest",))
    _common(p)

    p = add("trajectory", cmd_trajectory, "optimal liquidation path as (t, x) CSV")
    p.add_argument("--kind", default="ac", choices=("ac", "exp", "risk-neutral"))
    p.add_argument("--x0", type=float, default=1.0)
    p.add_argument("--xT", type=float, default=0.0)
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--k", type=float, help="urgency [1/day]")
    p.add_argument("--lam", type=float, help="risk parameter (alternative to --k)")
    p.add_argument("--beta", type=float, help="exponential kernel decay rate [1/day]")
    p.add_argument("--points", type=int, default=101)
    _common(p)

    p = add("impact", cmd_impact, "impact path h(t) of a profile CSV")
    _add_kernel_args(p)
    p.add_argument("--profile", help="profile CSV (t_start,t_end,rate,impulse)")
    p.add_argument("--t", help="comma-separated evaluation times")
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--until", type=float, help="end of the time grid (default: twice the profile end)")
    _common(p)

    p = add("cost", cmd_cost, "execution cost of a profile, a trade list or a constant rate")
    _add_kernel_args(p)
    p.add_argument("--profile", help="profile CSV")
    p.add_argument("--trades", help="trades CSV (t,volume)")
    p.add_argument("--q", type=float, help="constant rate [ADV/day]")
    p.add_argument("--horizon", type=float, help="duration for --q [days]")
    _common(p)

    p = add("rate-for-price", cmd_rate_for_price, "trading profile that holds a target impact")
    _add_kernel_args(p)
    p.add_argument("--target", default="constant", choices=("constant", "power"))
    p.add_argument("--delta-s", type=float, default=1.0, help="constant impact level")
    p.add_argument("--power", type=float, default=0.5, help="exponent of the power target")
    p.add_argument("--scale", type=float, default=1.0, help="prefactor of the power target")
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--intervals", type=int, default=200)
    p.add_argument("--grid", default="geometric", choices=("geometric", "uniform"))
    p.add_argument("--method", default="auto", choices=("auto", "closed", "laplace"))
    _common(p)

    p = add("arbitrage-check", cmd_arbitrage_check, "cycle work of seeded random round trips")
    _add_kernel_args(p)
    p.add_argument("--n-profiles", type=int, default=1000)
    p.add_argument("--seed", type=int, help=f"RNG seed (default: ${SEED_ENV} or 0)")
    p.add_argument("--intervals", type=int, default=16)
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-9, help="allowed negative scaled work")
    _common(p)

    p = add("sweep", cmd_sweep, "cost versus trading rate in one regime")
    _add_kernel_args(p)
    p.add_argument("--regime", default="isochronic", choices=tuple(_SWEEP_BUILDERS))
    p.add_argument("--steps", help="trade counts (isochronic) or horizons: list or start:stop:xF")
    p.add_argument("--fixed", type=float, help="the fixed T, Q or q")
    p.add_argument("--child-size", type=float, default=1e-4, help="child order size [ADV]")
    p.add_argument("--mode", default="both", choices=("discrete", "continuous", "both"))
    p.add_argument("--cap", type=float, default=0.5, help="participation cap [ADV/day]")
    _common(p)

    p = add("law-check", cmd_law_check, "regime-law constant across sweep families and kappas")
    p.add_argument("--kappas", default="0.25,1,4")
    p.add_argument("--c", type=float, default=FIGURE_KERNEL.c)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--threshold", type=float, default=1e3, help="minimum reduced time")
    _common(p)

    p = add("binary-tree", cmd_binary_tree, "expected shortfall on a one-tick binary tree")
    p.add_argument("--policy", default="market", choices=("market", "limit"))
    p.add_argument("--p-up", type=float, default=0.5)
    _common(p)

    p = sub.add_parser("rerun", help="replay a manifest", description="replay a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", help="output directory (default: the manifest's directory)")
    p.set_defaults(handler=None)
    subs["rerun"] = p

    ap._subs = subs  # used by config-file handling and rerun
    return ap


# --- config files -----------------------------------------------------------------


def load_config_file(path) -> dict[str, str]:
    out = {}
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def _apply_config(sub: argparse.ArgumentParser, values: dict[str, str]):
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in values.items():
        act = actions.get(key)
        if act is None or key in _PLUMBING:
            raise UsageError(f"unknown config key {key!r}")
        if isinstance(act, argparse._StoreTrueAction):
            if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise UsageError(f"config key {key!r} expects true or false")
            defaults[key] = value.lower() in ("true", "1", "yes")
        else:
            # string defaults are converted by argparse's type
            defaults[key] = value
    sub.set_defaults(**defaults)


# --- dispatch ---------------------------------------------------------------------


def _recorded(a) -> dict:
    cfg = {"command": a.command}
    for k, v in sorted(vars(a).items()):
        if k in _PLUMBING:
            continue
        if k in ("profile", "trades") and v:
            v = str(Path(v).resolve())
        cfg[k] = v
    if "family" in cfg:
        # informational; rerun rebuilds the kernel from the flags above
        cfg[_RESOLVED] = kernel_params(kernel_from_args(a))
    return cfg


def _execute(a) -> int:
    result = a.handler(a)
    csv, plot = result[0], result[1]
    failure = result[2] if len(result) > 2 else None
    sys.stdout.write(csv)
    if a.out:
        out = Path(a.out)
        files = [write_text(out / f"{a.command}.csv", csv)]
        if getattr(a, "plot", False) and plot is not None:
            files.append(write_text(out / f"{a.command}.svg", plot()))
        write_manifest(out, _recorded(a), files, __version__)
    elif getattr(a, "plot", False) and plot is not None:
        print("note: --plot needs --out; no SVG written", file=sys.stderr)
    if failure:
        raise Unreliable(failure)
    return 0


def _rerun(ap, a) -> int:
    man = read_manifest(a.manifest)
    cfg = dict(man.get("config", {}))
    command = cfg.pop("command", None)
    cfg.pop(_RESOLVED, None)
    if command not in ap._subs or command == "rerun":
        raise UsageError(f"manifest names no runnable command: {command!r}")
    ns = ap._subs[command].parse_args([])
    for k, v in cfg.items():
        if not hasattr(ns, k):
            raise UsageError(f"manifest key {k!r} is not an option of {command}")
        setattr(ns, k, v)
    ns.command = command
    ns.config = None
    ns.out = a.out or str(Path(a.manifest).resolve().parent)
    return _execute(ns)


def main(argv=None) -> int:
    ap = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        a = ap.parse_args(argv)
        if a.command is None:
            ap.print_usage(sys.stderr)
            return 2
        if a.command == "rerun":
            return _rerun(ap, a)
        if a.config:
            _apply_config(ap._subs[a.command], load_config_file(a.config))
            a = ap.parse_args(argv)
        return _execute(a)
    except SystemExit as exc:  # argparse usage errors and --help/--version
        return int(exc.code or 0) if not isinstance(exc.code, str) else 2
    except (InversionUnreliableError, Unreliable, ArithmeticError) as exc:
        print(f"error: numerical result unreliable: {exc}", file=sys.stderr)
        return 1
    except (UsageError, ValueError, TypeError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
