"""Acceptance criteria 1-11.

Each test records one ``criterion N: PASS|FAIL ...`` line, printed in the
pytest terminal summary (and immediately when run with ``-s``).  The file
also runs standalone: ``python tests/test_acceptance.py``.
"""

import json
import math
import os
import warnings

import mpmath as mp
import numpy as np
import pytest

from impactlab.cli import main as cli_main
from impactlab.impact import (
    ConstantPrice,
    PowerPrice,
    arbitrage_sweep,
    rate_for_price_target,
    target_rate_density,
    temporary_impact,
)
from impactlab.kernels import DeltaKernel, DiffusionKernel, ExponentialKernel, kernel_at_zero
from impactlab.laplace import erfcx, invert_laplace, selftest
from impactlab.regimes import (
    DEFAULT_KERNEL,
    FIGURE_KERNEL,
    binary_tree_shortfall,
    fit_loglog_slope,
    isochoric_config,
    isochronic_config,
    isotachic_config,
    regime_law_check,
    run_sweep,
    SweepResult,
)
from impactlab.trajectories import (
    Trajectory,
    TrajectoryProblem,
    ac_trajectory,
    euler_residual,
    exp_kernel_trajectory,
    urgency_from_risk,
)

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # standalone run
    ACCEPTANCE_LINES = []


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


# 1 -------------------------------------------------------------------------------


def test_01_laplace_inversion_accuracy():
    # oracle check: erfcx against mpmath to 1e-12 absolute
    xs = np.sqrt(np.logspace(-3, 3, 50))
    oracle_err = max(abs(erfcx(x) - float(mp.exp(mp.mpf(x) ** 2) * mp.erfc(x))) for x in xs)
    worst = 0.0
    for c, kappa in ((1.0, 1.0), (2.0, 0.5)):
        tr = np.logspace(-3, 3, 50)
        t = tr * c**2 / kappa
        image = lambda s: 1.0 / (c * s + np.sqrt(s * kappa))  # noqa: E731
        got = invert_laplace(image, t)
        want = erfcx(np.sqrt(tr)) / c
        worst = max(worst, float(np.max(np.abs(got / want - 1.0))))
    report(1, worst <= 1e-6 and oracle_err <= 1e-12,
           f"max rel err {worst:.2e} (<= 1e-6), erfcx oracle abs err {oracle_err:.1e}")


# 2 -------------------------------------------------------------------------------


def test_02_transform_pair_suite():
    rows = selftest()
    pairs = {r["pair"] for r in rows}
    err = max(r["rel_err_talbot"] for r in rows)
    agree = max(abs(r["talbot"] - r["gaver_stehfest"]) / abs(r["exact"]) for r in rows)
    ok = len(pairs) == 5 and err <= 1e-6 and agree <= 1e-4 and all(r["passed"] for r in rows)
    report(2, ok, f"{len(pairs)} pairs, talbot rel err {err:.1e}, talbot vs gaver-stehfest {agree:.1e}")


# 3 -------------------------------------------------------------------------------


def test_03_trajectory_limit_chain():
    x0, xT, T, k = 1.0, 0.0, 1.0, 2.0
    beta = 1e6 * max(k * T, 1.0) / T
    t = np.linspace(0.0, T, 201)
    tr = exp_kernel_trajectory(TrajectoryProblem(x0, xT, T, k=k, beta=beta), t)
    ac = ac_trajectory(TrajectoryProblem(x0, xT, T, k=k), t)
    sup = float(np.max(np.abs(tr.positions - ac)))
    sup = max(sup, abs(tr.jump_initial), abs(tr.jump_terminal))

    beta = 5.0
    lam = 1e-10 * beta**2
    p = TrajectoryProblem(x0, xT, T, k=urgency_from_risk(lam, beta), beta=beta)
    jumps = exp_kernel_trajectory(p, t)
    d = (x0 - xT) / (beta * T + 2.0)
    jerr = max(abs(jumps.jump_initial / d - 1), abs(jumps.jump_terminal / d - 1))
    ok = sup <= 1e-3 * abs(x0 - xT) and jerr <= 1e-4
    report(3, ok, f"sup|exp - ac| {sup:.1e} (<= 1e-3), jump rel err {jerr:.1e} (<= 1e-4)")


# 4 -------------------------------------------------------------------------------


def test_04_euler_residual_convergence():
    p = TrajectoryProblem(1.0, 0.0, 1.0, k=2.0)
    res = []
    for n in (128, 256):
        t = np.linspace(0.0, 1.0, n)
        res.append(euler_residual(Trajectory(t, ac_trajectory(p, t)), DeltaKernel(), p.lam))
    ratio = res[0] / res[1]
    report(4, ratio >= 3.0, f"residual {res[0]:.2e} -> {res[1]:.2e}, ratio {ratio:.2f} (>= 3)")


# 5 -------------------------------------------------------------------------------


def test_05_no_dynamic_arbitrage():
    seed = int(os.environ.get("IMPACTLAB_SEED", "0"))
    worst = {}
    for name, k in (("diffusion", DEFAULT_KERNEL), ("exponential", ExponentialKernel(1.0, 1.0))):
        worst[name] = float(arbitrage_sweep(k, n_profiles=1000, seed=seed).min())
    ok = all(v >= -1e-9 for v in worst.values())
    detail = ", ".join(f"{n} min W/scale {v:.2e}" for n, v in worst.items())
    report(5, ok, f"1000 profiles each, seed {seed}: {detail}")


# 6 -------------------------------------------------------------------------------


def test_06_regime_slopes():
    # large reduced time needs kappa T / c^2 >> 1, hence the small-c calibration
    k = FIGURE_KERNEL
    chron = run_sweep(isochronic_config(k, mode="continuous"))
    s_chron = fit_loglog_slope(chron).slope

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        choric = run_sweep(isochoric_config(k, mode="continuous"))
    asym = SweepResult(tuple(r for r in choric.rows if k.reduced_time(r.time) >= 1e3))
    s_choric = fit_loglog_slope(asym).slope

    tach = run_sweep(isotachic_config(k, mode="continuous", steps=(16.0, 32.0, 64.0)))
    norm = tach.column("cost_continuous") / np.sqrt(tach.column("time"))
    spread = float(norm.max() / norm.min() - 1.0)

    ok = abs(s_chron - 1.0) <= 0.02 and abs(s_choric - 0.5) <= 0.05 and spread <= 0.02
    report(6, ok, f"isochronic slope {s_chron:.4f}, isochoric slope {s_choric:.4f} "
                  f"({len(asym)} rows), isotachic cost/sqrt(T) spread {spread:.2%}")


# 7 -------------------------------------------------------------------------------


def test_07_discrete_to_continuous():
    cfg = isochronic_config(DEFAULT_KERNEL)
    res = run_sweep(cfg)
    disc, cont = res.column("cost_discrete"), res.column("cost_continuous")
    n = res.column("n_trades")
    gap = abs(disc[-1] / cont[-1] - 1.0)
    monotone = bool(np.all(np.diff(disc) >= 0))
    floor = 0.5 * cfg.child_size * kernel_at_zero(cfg.kernel)
    bounded = bool(np.all(disc >= floor * (1 - 1e-12)))
    r_default = disc[n == 16][0] / disc[n == 1][0]
    fig = run_sweep(isochronic_config(FIGURE_KERNEL)).column("cost_discrete")
    r_figure = fig[4] / fig[0]
    ok = gap <= 0.02 and monotone and bounded
    report(7, ok, f"N=1024 gap {gap:.1e} (<= 2%), monotone {monotone}, floor {bounded}; "
                  f"N16/N1 = {r_default:.3f} (c=1), {r_figure:.3f} (c=0.01; reference 1.25)")


# 8 -------------------------------------------------------------------------------


def test_08_rate_for_price_round_trip():
    k = DiffusionKernel(1.0, 1.0)
    grid = np.concatenate(([0.0], np.geomspace(1e-6, 200.0, 800)))
    p = rate_for_price_target(ConstantPrice(1.0), k, grid)
    t = np.geomspace(1.0, 100.0, 25) * k.c**2 / k.kappa
    err_const = float(np.max(np.abs(temporary_impact(p, k, t) - 1.0)))

    # alpha = 1/2: h = sqrt(t) needs q = c / (2 sqrt t) + sqrt(pi kappa) / 2
    target = PowerPrice(0.5)
    tt = np.geomspace(0.1, 50.0, 9)
    const_part = target_rate_density(target, k, tt) - k.c / (2 * np.sqrt(tt))
    err_rate = float(np.max(np.abs(const_part / (math.sqrt(math.pi * k.kappa) / 2) - 1.0)))
    pp = rate_for_price_target(target, k, grid, method="laplace")
    h = temporary_impact(pp, k, t)
    err_pow = float(np.max(np.abs(h / np.sqrt(t) - 1.0)))
    ok = err_const <= 0.01 and err_pow <= 0.01 and err_rate <= 1e-12
    report(8, ok, f"constant target max err {err_const:.1e}, sqrt target max rel err "
                  f"{err_pow:.1e} (<= 1%), analytic constant rate err {err_rate:.0e}")


# 9 -------------------------------------------------------------------------------


def test_09_binary_tree():
    m = binary_tree_shortfall("market", 0.5)
    lim = binary_tree_shortfall("limit", 0.5)
    q = binary_tree_shortfall("limit", 0.25)
    ok = m == -0.5 and lim == -0.5 and abs(q - 1 / 6) <= 1e-15
    report(9, ok, f"market {m}, limit(0.5) {lim}, limit(0.25) {q!r}")


# 10 ------------------------------------------------------------------------------


def test_10_regime_law_constant():
    kappas = (0.25, 1.0, 4.0)
    ratios, means = [], []
    for kappa in kappas:
        chk = regime_law_check(DiffusionKernel(0.01, kappa))
        ratios.append(chk.ratio)
        means.append(chk.constants().mean())
    slope = float(np.polyfit(np.log(kappas), np.log(means), 1)[0])
    scaled = np.array(means) * np.sqrt(kappas)
    spread = float(scaled.max() / scaled.min() - 1.0)
    ok = max(ratios) <= 1.05 and abs(slope + 0.5) <= 0.05 and spread <= 0.05
    report(10, ok, f"max C ratio per kappa {max(ratios):.4f} (<= 1.05), "
                   f"kappa exponent {slope:.3f}, C*sqrt(kappa) spread {spread:.2%}")


# 11 ------------------------------------------------------------------------------

RUNS = [
    ["sweep", "--regime", "isochronic", "--steps", "1:1024:x2", "--plot"],
    ["sweep", "--regime", "isochoric", "--c", "0.01", "--mode", "continuous"],
    ["kernel", "--family", "diffusion", "--x2", "2", "--t", "0,0.5,1,5"],
    ["trajectory", "--kind", "exp", "--k", "1", "--beta", "4"],
    ["arbitrage-check", "--n-profiles", "50", "--seed", "3"],
    ["rate-for-price", "--target", "power", "--intervals", "50"],
    ["law-check"],
    ["binary-tree", "--policy", "limit", "--p-up", "0.25"],
    ["invlap", "selftest"],
]


def test_11_determinism(tmp_path, capsys):
    same = 0
    for i, argv in enumerate(RUNS):
        a, b = tmp_path / f"run{i}", tmp_path / f"rerun{i}"
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            assert cli_main(argv + ["--out", str(a)]) == 0
            assert cli_main(["rerun", str(a / "manifest.json"), "--out", str(b)]) == 0
        capsys.readouterr()
        csvs = json.loads((a / "manifest.json").read_text())["outputs"]
        csvs = [n for n in csvs if n.endswith(".csv")]
        same += all((a / n).read_bytes() == (b / n).read_bytes() for n in csvs)
    with capsys.disabled():
        report(11, same == len(RUNS), f"{same}/{len(RUNS)} manifests re-ran to byte-identical CSVs")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
