"""Cost versus trading rate in three regimes, and what a mixed sample shows.

Fix the horizon and the cost grows linearly with the rate; fix the volume
and it grows like sqrt(rate); fix the rate and cost/sqrt(T) stays put.  A
dataset that mixes regimes shows an exponent in between.  Writes SVG plots
to ./regime_plots.
"""

import warnings
from pathlib import Path

from impactlab.csvio import write_text
from impactlab.plot import emit_plot
from impactlab.regimes import (
    FIGURE_KERNEL,
    SweepResult,
    fit_loglog_slope,
    isochoric_config,
    isochronic_config,
    isotachic_config,
    mixed_regime_experiment,
    regime_law_check,
    run_sweep,
)

out = Path("regime_plots")
k = FIGURE_KERNEL  # kappa/c^2 = 1e4, so horizons of a day are deep in the asymptotic regime

chron = run_sweep(isochronic_config(k))
print("isochronic slope:", round(fit_loglog_slope(chron).slope, 4))
n = chron.column("n_trades")
disc = chron.column("cost_discrete")
print("discrete cost N=16 / N=1:", round(disc[n == 16][0] / disc[n == 1][0], 3))
write_text(out / "isochronic.svg", emit_plot(chron, title="T fixed"))

with warnings.catch_warnings():
    warnings.simplefilter("ignore")  # the shortest horizons exceed the participation cap
    choric = run_sweep(isochoric_config(k, mode="continuous"))
asym = SweepResult(tuple(r for r in choric.rows if k.reduced_time(r.time) >= 1e3))
print("isochoric slope (asymptotic rows):", round(fit_loglog_slope(asym).slope, 4))
write_text(out / "isochoric.svg", emit_plot(choric, title="Q fixed"))

tach = run_sweep(isotachic_config(k, mode="continuous"))
print("isotachic cost/sqrt(T):", (tach.column("cost_continuous") / tach.column("time") ** 0.5).round(5))

pooled, fit = mixed_regime_experiment(k)
print(f"pooled sample of {fit.n} rows: slope {fit.slope:.3f}")

chk = regime_law_check(k)
print(f"law constant C over {len(chk.constants())} asymptotic rows: max/min {chk.ratio:.4f}")
