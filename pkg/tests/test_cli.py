import json
import xml.etree.ElementTree as ET

import pytest

from culturedyn import FigureReproductionError, ClassifierThresholds, dump_scenario, load_scenario, read_trajectory_csv
from culturedyn.cli import main
from culturedyn.figures import reproduce_figure
from culturedyn.presets import FIGURES, preset, preset_file_text

DIVERGENT = """\
[culture 0]
a = 1e6
b = 0
d = 1e6
e = 0
s0 = 0
s1 = 1e9
h0 = 1e6
d0 = 1
s_init = 1
[integration]
horizon = 1
"""


@pytest.fixture
def scn(tmp_path):
    def write(name, text=None):
        path = tmp_path / f"{name}.scn"
        path.write_text(text if text is not None else preset_file_text(name))
        return str(path)
    return write


def test_simulate_writes_csv_and_svg(scn, tmp_path):
    out = tmp_path / "out"
    assert main(["simulate", "--scenario", scn("fig1a"), "--horizon", "2", "--out", str(out),
                 "--format", "both"]) == 0
    traj = read_trajectory_csv((out / "trajectory.csv").read_text(), preset("fig1a"))
    assert len(traj) == 201
    ET.parse(out / "trajectory.svg")


def test_simulate_divergent_exits_2_with_partial_output(scn, tmp_path, capsys):
    out = tmp_path / "div"
    assert main(["simulate", "--scenario", scn("div", DIVERGENT), "--out", str(out)]) == 2
    assert "divergence at t =" in capsys.readouterr().err
    assert (out / "trajectory.csv").read_text().startswith("t,D_0,S_0,H_0\n0,1,1,")


def test_invalid_scenario_exits_1(scn, capsys):
    bad = preset_file_text("fig1a").replace("s1 = 10", "s1 = 0")
    assert main(["simulate", "--scenario", scn("bad", bad)]) == 1
    err = capsys.readouterr().err
    assert "s1" in err and "line" in err


def test_missing_file_and_bad_usage_exit_1(tmp_path):
    assert main(["classify", "--scenario", str(tmp_path / "none.scn")]) == 1
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 1


def test_classify_prints_json(scn, capsys):
    assert main(["classify", "--scenario", scn("fig2")]) == 0
    reports = json.loads(capsys.readouterr().out)
    assert [r["label"] for r in reports] == ["StabilizedMulticultural"] * 2


def test_classify_divergent_reports_label(scn, capsys):
    assert main(["classify", "--scenario", scn("div", DIVERGENT)]) == 0
    assert json.loads(capsys.readouterr().out)[0]["label"] == "Divergent"


def test_classify_with_thresholds(scn, tmp_path, capsys):
    th = tmp_path / "th.txt"
    th.write_text("[thresholds]\nmin_oscillations = 1000\n")
    assert main(["classify", "--scenario", scn("fig1a"), "--thresholds", str(th)]) == 0
    assert json.loads(capsys.readouterr().out)[0]["label"] != "ConceptualOscillatory"


def test_sweep_writes_map(scn, tmp_path, capsys):
    out = tmp_path / "sweep"
    argv = ["sweep", "--scenario", scn("fig1b"), "--axis", "a:2:20:3", "--axis", "s_init:3:50:2",
            "--out", str(out), "--workers", "2"]
    assert main(argv) == 0
    lines = (out / "regime_map.csv").read_text().splitlines()
    assert len(lines) == 7
    counts = json.loads(capsys.readouterr().out.splitlines()[-1])
    assert sum(counts.values()) == 6


def test_sweep_bad_axis_exits_1(scn, tmp_path):
    assert main(["sweep", "--scenario", scn("fig1a"), "--axis", "a:1:2", "--out", str(tmp_path)]) == 1


def test_fit_recovers_and_writes_scenario(scn, tmp_path, capsys):
    truth = preset("fig1a").replace(horizon=2.0)
    obs = tmp_path / "obs"
    assert main(["simulate", "--scenario", scn("fig1a"), "--horizon", "2", "--out", str(obs)]) == 0
    start = scn("start", dump_scenario(truth.with_value("a", 11.0)))
    fitted = tmp_path / "fitted.scn"
    capsys.readouterr()
    assert main(["fit", "--observed", str(obs / "trajectory.csv"), "--scenario", start,
                 "--free", "a", "--out", str(fitted)]) == 0
    result = json.loads(capsys.readouterr().out)
    assert result["values"]["culture.0.a"] == pytest.approx(10.0, rel=1e-4)
    assert load_scenario(fitted.read_text()).get("a") == pytest.approx(10.0, rel=1e-4)


@pytest.mark.parametrize("name", FIGURES)
def test_reproduce_figure_artifacts(name, tmp_path):
    csv_path, svg_path, reports = reproduce_figure(name, tmp_path)
    traj = read_trajectory_csv(csv_path.read_text(), preset(name))
    assert traj.times[-1] == pytest.approx(preset(name).horizon)
    root = ET.parse(svg_path).getroot()
    assert len(root.findall("{http://www.w3.org/2000/svg}polyline")) == 2 * traj.n_cultures
    assert len(reports) == traj.n_cultures


def test_reproduce_figure_mismatch_raises(tmp_path):
    strict = ClassifierThresholds(min_oscillations=1000)
    with pytest.raises(FigureReproductionError, match="figure reproduction failed"):
        reproduce_figure("fig1a", tmp_path, strict)
    assert (tmp_path / "fig1a.csv").exists()


def test_figure_command(tmp_path, capsys):
    assert main(["figure", "fig1b", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "fig1b.svg").exists()
