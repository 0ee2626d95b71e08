import math
import warnings

import numpy as np
import pytest

from impactlab.kernels import DeltaKernel, DiffusionKernel, kernel_at_zero
from impactlab.regimes import (
    COLUMNS,
    DEFAULT_KERNEL,
    FIGURE_KERNEL,
    SweepConfig,
    SweepResult,
    SweepRow,
    binary_tree_shortfall,
    default_law_configurations,
    discrete_floor,
    fit_loglog_slope,
    isochoric_config,
    isochronic_config,
    isotachic_config,
    kernel_params,
    midpoint_trades,
    mixed_regime_experiment,
    pool,
    regime_law_check,
    run_sweep,
    uniform_discrete_cost,
)
from impactlab.impact import discrete_cost

# K_{-2}(0.5) for c = 0.01, kappa = 1 by mpmath quadrature
K2_FIGURE_HALF_DAY = 0.26104031670175003525


def quiet_sweep(cfg):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return run_sweep(cfg)


def test_isochronic_defaults():
    res = run_sweep(isochronic_config())
    assert len(res) == 11
    n = res.column("n_trades")
    np.testing.assert_array_equal(n, 2.0 ** np.arange(11))
    assert np.all(np.diff(res.column("cost_continuous")) > 0)
    assert np.all(np.diff(res.column("cost_discrete")) >= 0)
    np.testing.assert_allclose(res.column("time"), 0.5)


def test_isochronic_costs_match_oracle():
    res = run_sweep(isochronic_config(FIGURE_KERNEL, mode="continuous"))
    q = res.column("rate")
    np.testing.assert_allclose(res.column("cost_continuous"), q * K2_FIGURE_HALF_DAY / 0.5, rtol=1e-9)
    assert np.all(np.isnan(res.column("cost_discrete")))


def test_discrete_floor_and_ordering():
    cfg = isochronic_config()
    res = run_sweep(cfg)
    disc, cont = res.column("cost_discrete"), res.column("cost_continuous")
    floor = discrete_floor(cfg)
    assert floor == 0.5 * 1e-4 * kernel_at_zero(DEFAULT_KERNEL)
    assert disc[0] == pytest.approx(floor, rel=1e-12)
    assert np.all(disc >= floor * (1 - 1e-12))
    # lumping volume into point trades never lowers the cost
    assert np.all(disc >= cont)


def test_isochoric_and_isotachic_rows():
    cho = quiet_sweep(isochoric_config(halvings=4))
    np.testing.assert_allclose(cho.column("volume"), 12e-4)
    np.testing.assert_allclose(cho.column("time"), [8, 4, 2, 1, 0.5])
    assert np.all(cho.column("n_trades") == 12)
    tac = run_sweep(isotachic_config())
    np.testing.assert_allclose(tac.column("rate"), 0.1)
    np.testing.assert_allclose(tac.column("n_trades"), tac.column("volume") / 1e-4)


def test_participation_cap_flag_and_warning():
    cfg = isochoric_config(halvings=16, mode="continuous")
    with pytest.warns(UserWarning, match="participation cap"):
        res = run_sweep(cfg)
    flagged = [r for r in res.rows if r.flag]
    assert flagged and all(r.rate > 0.5 for r in flagged)


def test_sweep_csv_format():
    text = run_sweep(isochronic_config(steps=(1, 2))).to_csv()
    lines = text.split("\n")
    assert lines[0] == ",".join(COLUMNS)
    assert "\r" not in text and text.endswith("\n")
    assert lines[1].split(",")[3] == "1"
    assert float(lines[1].split(",")[0]) == pytest.approx(2e-4)


def test_config_validation():
    with pytest.raises(ValueError):
        SweepConfig("isobaric", 1.0, (1,))
    with pytest.raises(ValueError):
        isochronic_config(steps=(1, 2.5))
    with pytest.raises(ValueError):
        isochronic_config(steps=(4, 2, 8))
    with pytest.raises(ValueError):
        isochronic_config(steps=())
    with pytest.raises(ValueError):
        isochronic_config(mode="both", kernel=DeltaKernel())
    assert isochronic_config(mode="continuous", kernel=DeltaKernel()).kernel == DeltaKernel()
    with pytest.raises(ValueError):
        isotachic_config(fixed_quantity=0.0)


def test_config_dict_is_complete():
    d = isochoric_config(FIGURE_KERNEL).to_dict()
    assert d["kernel"] == {"family": "diffusion", "c": 0.01, "kappa": 1.0, "x2": math.inf}
    assert d["regime"] == "isochoric" and len(d["steps"]) == 17
    assert kernel_params(DeltaKernel(2.0)) == {"family": "delta", "eta": 2.0}


def test_midpoint_trades():
    tr = midpoint_trades(4, 2.0, 0.5)
    np.testing.assert_allclose(tr[:, 0], [0.25, 0.75, 1.25, 1.75])
    np.testing.assert_allclose(tr[:, 1], 0.5)


@pytest.mark.parametrize("n", [1, 2, 7, 64])
def test_uniform_discrete_cost_matches_general_sum(n):
    k = DiffusionKernel(0.3, 2.0)
    assert uniform_discrete_cost(n, 0.5, 1e-4, k) == pytest.approx(
        discrete_cost(midpoint_trades(n, 0.5, 1e-4), k), rel=1e-12
    )


def test_slope_fit_on_power_law():
    rows = tuple(_row(q, 3.0 * q**0.7) for q in np.geomspace(1e-3, 1, 9))
    fit = fit_loglog_slope(SweepResult(rows))
    assert fit.slope == pytest.approx(0.7, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-12)
    assert fit.n == 9
    fit = fit_loglog_slope(SweepResult(rows), range=(1e-2, 1.0))
    assert fit.n < 9
    with pytest.raises(ValueError):
        fit_loglog_slope(SweepResult(rows[:2]))


def _row(q, cost):
    return SweepRow(q, q, 1.0, 1, math.nan, cost, "")


def test_pool_concatenates():
    a = run_sweep(isochronic_config(steps=(1, 2)))
    b = run_sweep(isotachic_config(steps=(1, 2)))
    p = pool(a, b)
    assert len(p) == 4 and len(p.metadata["pooled"]) == 2


def test_isochronic_slope_is_one_in_asymptotic_regime():
    res = run_sweep(isochronic_config(FIGURE_KERNEL, mode="continuous"))
    assert fit_loglog_slope(res).slope == pytest.approx(1.0, abs=1e-9)


def test_law_constant_matches_asymptote():
    # K ~ 1/sqrt(pi kappa t) gives C -> 4 / (3 sqrt(pi kappa))
    chk = regime_law_check(DiffusionKernel(0.01, 1.0))
    assert chk.ratio < 1.05
    C = chk.constants()
    np.testing.assert_allclose(C, 4 / (3 * math.sqrt(math.pi)), rtol=0.03)


def test_law_check_marks_short_horizons():
    chk = regime_law_check(DiffusionKernel(1.0, 1.0), threshold=10.0)
    assert not any(r.asymptotic for r in chk.rows)
    assert math.isnan(chk.ratio)
    with pytest.raises(TypeError):
        regime_law_check(DeltaKernel())
    assert len(default_law_configurations()) == 12


def test_binary_tree():
    assert binary_tree_shortfall("market") == -0.5
    assert binary_tree_shortfall("market", 0.9) == -0.5
    assert binary_tree_shortfall("limit", 0.5) == -0.5
    assert binary_tree_shortfall("limit", 0.25) == pytest.approx(1 / 6, abs=1e-15)
    # W = p_down/2 + p_up (W - 1) solved by fixed-point iteration
    p = 0.4
    w = 0.0
    for _ in range(200):
        w = (1 - p) * 0.5 + p * (w - 1)
    assert binary_tree_shortfall("limit", p) == pytest.approx(w, abs=1e-12)
    with pytest.raises(ValueError):
        binary_tree_shortfall("limit", 1.0)
    with pytest.raises(ValueError):
        binary_tree_shortfall("iceberg")


def test_mixed_regimes_give_intermediate_exponent():
    pooled, fit = mixed_regime_experiment()
    assert fit.n >= 6
    assert 0.6 < fit.slope < 0.9
    assert pooled.metadata["rate_range"][0] < pooled.metadata["rate_range"][1]
