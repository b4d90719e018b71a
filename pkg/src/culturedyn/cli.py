"""Command-line entry point ``culturedyn``.

Exit status: 0 success, 1 invalid input, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .analysis import classify_all
from .errors import CultureDynError, DivergenceError, NumericalError, ValidationError
from .export import default_selection, export_trajectory_csv, read_trajectory_csv, render_svg_plot
from .figures import reproduce_figure
from .integrator import integrate
from .presets import FIGURES
from .scenario_file import dump_scenario, load_scenario, load_thresholds
from .sweep import AxisSpec, fit_parameters, run_sweep

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}", field=path) from None


def _scenario(args):
    scenario = load_scenario(_read(args.scenario))
    changes = {}
    if getattr(args, "horizon", None) is not None:
        changes["horizon"] = args.horizon
    if getattr(args, "dt", None) is not None:
        changes["dt"] = args.dt
    return scenario.replace(**changes) if changes else scenario


def _thresholds(args):
    return load_thresholds(_read(args.thresholds)) if args.thresholds else None


def _write_trajectory(trajectory, out: Path, fmt: str):
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in ("csv", "both"):
        path = out / "trajectory.csv"
        path.write_text(export_trajectory_csv(trajectory))
        written.append(path)
    if fmt in ("svg", "both") and len(trajectory):
        path = out / "trajectory.svg"
        path.write_text(render_svg_plot(trajectory, default_selection(trajectory)))
        written.append(path)
    return written


def cmd_simulate(args) -> int:
    scenario = _scenario(args)
    out = Path(args.out)
    try:
        trajectory = integrate(scenario)
    except DivergenceError as exc:
        for path in _write_trajectory(exc.trajectory, out, args.format):
            print(f"wrote partial {path}")
        raise
    for path in _write_trajectory(trajectory, out, args.format):
        print(f"wrote {path}")
    if trajectory.n_clamps:
        print(f"note: D was clamped at 0 {trajectory.n_clamps} time(s)", file=sys.stderr)
    return EXIT_OK


def cmd_classify(args) -> int:
    scenario = _scenario(args)
    try:
        trajectory = integrate(scenario)
    except DivergenceError as exc:
        trajectory = exc.trajectory
    reports = classify_all(trajectory, _thresholds(args))
    print(json.dumps([r.to_dict() for r in reports], indent=2))
    return EXIT_OK


def cmd_sweep(args) -> int:
    scenario = _scenario(args)
    axes = [AxisSpec.parse(text) for text in args.axis]
    regime_map = run_sweep(scenario, axes, _thresholds(args), culture=args.culture, workers=args.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "regime_map.csv"
    path.write_text(regime_map.to_csv())
    counts = {}
    for report in regime_map.reports:
        counts[report.label.value] = counts.get(report.label.value, 0) + 1
    print(f"wrote {path}")
    print(json.dumps(counts, sort_keys=True))
    return EXIT_OK


def cmd_fit(args) -> int:
    scenario = _scenario(args)
    observed = read_trajectory_csv(_read(args.observed), scenario)
    free = [p.strip() for p in args.free.split(",") if p.strip()]
    result = fit_parameters(observed, scenario, free, seed=args.seed)
    if args.out:
        Path(args.out).write_text(dump_scenario(result.scenario))
    print(json.dumps(result.to_dict(), indent=2))
    return EXIT_OK


def cmd_figure(args) -> int:
    csv_path, svg_path, reports = reproduce_figure(args.identifier, args.out)
    print(f"wrote {csv_path}")
    print(f"wrote {svg_path}")
    print(json.dumps([r.to_dict() for r in reports], indent=2))
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # argparse's default status 2 is reserved for numerical failures
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="culturedyn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="integrate a scenario and write CSV/SVG")
    p.add_argument("--scenario", required=True)
    p.add_argument("--horizon", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--out", default=".")
    p.add_argument("--format", choices=("csv", "svg", "both"), default="csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("classify", help="print the regime of every culture as JSON")
    p.add_argument("--scenario", required=True)
    p.add_argument("--thresholds")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("sweep", help="regime map over one or more parameter axes")
    p.add_argument("--scenario", required=True)
    p.add_argument("--axis", action="append", required=True, metavar="PATH:LO:HI:STEPS")
    p.add_argument("--out", required=True)
    p.add_argument("--thresholds")
    p.add_argument("--culture", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="fit free coefficients to an observed CSV trajectory")
    p.add_argument("--observed", required=True)
    p.add_argument("--scenario", required=True)
    p.add_argument("--free", required=True, help="comma-separated parameter paths, e.g. a,b,d")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the fitted scenario here")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("figure", help="reproduce a reference figure")
    p.add_argument("identifier", choices=FIGURES)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_figure)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except CultureDynError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
