import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from culturedyn import (
    ValidationError, export_trajectory_csv, integrate, read_trajectory_csv, render_svg_plot,
)
from culturedyn.presets import fig1a

SVG = "{http://www.w3.org/2000/svg}"


def test_single_sample_csv_exact():
    traj = integrate(fig1a().replace(horizon=0.0))
    assert export_trajectory_csv(traj) == "t,D_0,S_0,H_0\n0,10,3,1\n"


def test_two_culture_header(fig2_traj):
    header = export_trajectory_csv(fig2_traj).splitlines()[0].split(",")
    assert header == ["t", "D_0", "S_0", "H_0", "D_1", "S_1", "H_1"]


def test_csv_round_trip(fig2_traj):
    back = read_trajectory_csv(export_trajectory_csv(fig2_traj), fig2_traj.scenario)
    for name in ("times", "D", "S", "H"):
        np.testing.assert_allclose(getattr(back, name), getattr(fig2_traj, name), rtol=1e-8, atol=1e-12)


def test_csv_reader_rejects():
    scenario = fig1a()
    with pytest.raises(ValidationError):
        read_trajectory_csv("", scenario)
    with pytest.raises(ValidationError, match="header"):
        read_trajectory_csv("t,D_0,S_0\n0,1,2\n", scenario)
    with pytest.raises(ValidationError):
        read_trajectory_csv("t,D_0,S_0,H_0\n0,1,x,1\n", scenario)
    with pytest.raises(ValidationError):
        read_trajectory_csv("t,D_0,S_0,H_0\n0,1,inf,1\n", scenario)


def _polylines(svg):
    root = ET.fromstring(svg)
    return root, root.findall(f"{SVG}polyline")


def _points(poly):
    return [tuple(map(float, p.split(","))) for p in poly.get("points").split()]


def test_constant_series_is_horizontal_midline(linear_scenario):
    traj = integrate(linear_scenario)  # D stays at 4
    _, polys = _polylines(render_svg_plot(traj, ["D_0"]))
    ys = {y for _, y in _points(polys[0])}
    assert ys == {300.0}


def test_one_vertex_per_sample(fig1a_traj):
    _, polys = _polylines(render_svg_plot(fig1a_traj, ["D_0"]))
    assert len(polys) == 1
    assert len(_points(polys[0])) == len(fig1a_traj)


def test_points_inside_plot_area(fig2_traj):
    _, polys = _polylines(render_svg_plot(fig2_traj, ["D_0", "S_1"]))
    for poly in polys:
        for x, y in _points(poly):
            assert 80 <= x <= 640 and 50 <= y <= 550


def test_two_series_two_legend_entries(fig2_traj):
    root, polys = _polylines(render_svg_plot(fig2_traj, ["D_0", "D_1"]))
    assert len(polys) == 2
    labels = [t.text for t in root.findall(f"{SVG}text")]
    assert "D_0" in labels and "D_1" in labels
    assert root.get("width") == "800" and root.get("height") == "600"


def test_svg_deterministic(fig1a_traj):
    assert render_svg_plot(fig1a_traj, ["D_0", "S_0"]) == render_svg_plot(fig1a_traj, ["D_0", "S_0"])


def test_svg_numbers_fixed_precision(fig1a_traj):
    svg = render_svg_plot(fig1a_traj, ["D_0"])
    for value in re.findall(r' (?:x|y)\d?="([^"]+)"', svg):
        assert re.fullmatch(r"-?\d+(\.\d{3})?", value)


def test_svg_rejects_bad_selection(fig1a_traj):
    with pytest.raises(ValidationError):
        render_svg_plot(fig1a_traj, [])
    with pytest.raises(ValidationError):
        render_svg_plot(fig1a_traj, ["D_1"])
    with pytest.raises(ValidationError):
        render_svg_plot(fig1a_traj, ["Q_0"])
