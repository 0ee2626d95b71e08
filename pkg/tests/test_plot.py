import re

import numpy as np
import pytest

from impactlab.impact import ImpactPath
from impactlab.plot import emit_plot
from impactlab.regimes import isochronic_config, run_sweep


def polylines(svg):
    return re.findall(r"<polyline [^>]*>", svg)


def test_two_point_series_gives_one_polyline_each():
    svg = emit_plot({"a": ([1, 2], [3, 4]), "b": ([1, 2], [4, 3])})
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert len(polylines(svg)) == 2


def test_sweep_plot_has_distinct_series_and_units():
    svg = emit_plot(run_sweep(isochronic_config()))
    lines = polylines(svg)
    assert len(lines) == 2
    assert 'stroke="#2ca02c"' in lines[0]
    assert 'stroke="#1f77b4"' in lines[1] and "stroke-dasharray" in lines[1]
    assert "[ADV/day]" in svg and "[dimensionless]" in svg
    assert ">discrete<" in svg and ">continuous<" in svg


def test_continuous_only_sweep_has_one_series():
    svg = emit_plot(run_sweep(isochronic_config(mode="continuous")))
    assert len(polylines(svg)) == 1


def test_impact_path_is_linear():
    path = ImpactPath(np.array([0.0, 1.0, 2.0]), np.array([0.0, 1.0, 0.5]))
    svg = emit_plot(path, title="impact")
    assert len(polylines(svg)) == 1
    assert "time t [days]" in svg


def test_errors():
    with pytest.raises(ValueError, match="empty"):
        emit_plot({"a": ([], [])})
    with pytest.raises(ValueError, match="at least 2"):
        emit_plot({"a": ([1.0], [1.0])})
    with pytest.raises(ValueError, match="row 1"):
        emit_plot({"a": ([1.0, 2.0, 3.0], [1.0, 0.0, 2.0])}, log=True)
    with pytest.raises(ValueError, match="nothing"):
        emit_plot({})
    with pytest.raises(TypeError):
        emit_plot(42)


def test_output_is_deterministic():
    data = {"a": (np.geomspace(1, 100, 5), np.geomspace(2, 3, 5))}
    assert emit_plot(data, log=True) == emit_plot(data, log=True)
