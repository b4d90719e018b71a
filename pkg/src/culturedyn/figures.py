"""Re-run the reference figure scenarios and write their artifacts."""

from __future__ import annotations

import json
from pathlib import Path

from .analysis import ClassifierThresholds, RegimeReport, classify_all
from .errors import FigureReproductionError
from .export import export_trajectory_csv, render_svg_plot
from .integrator import refine_until_converged
from .presets import EXPECTED_REGIME, preset

CONVERGENCE_TOL = 1e-4


def reproduce_figure(identifier: str, out_dir: str | Path,
                     thresholds: ClassifierThresholds | None = None) -> tuple[Path, Path, tuple[RegimeReport, ...]]:
    """Integrate a preset with a converged step, write ``<id>.csv`` and ``<id>.svg``, classify.

    Every culture must land in the figure's expected regime, otherwise
    :class:`FigureReproductionError` is raised (after the files are written).
    """
    scenario = preset(identifier)
    _, trajectory = refine_until_converged(scenario, CONVERGENCE_TOL)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{identifier}.csv"
    svg_path = out / f"{identifier}.svg"
    csv_path.write_text(export_trajectory_csv(trajectory))
    selection = [f"{v}_{k}" for k in range(trajectory.n_cultures) for v in ("D", "S")]
    svg_path.write_text(render_svg_plot(trajectory, selection))

    reports = tuple(classify_all(trajectory, thresholds))
    expected = EXPECTED_REGIME[identifier]
    if any(r.label != expected for r in reports):
        details = json.dumps([r.to_dict() for r in reports], indent=2)
        raise FigureReproductionError(
            f"figure reproduction failed: expected {expected.value}\n{details}", reports)
    return csv_path, svg_path, reports
