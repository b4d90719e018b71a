"""Parameter grids, regime-boundary bisection and simulation-based fitting."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .analysis import ClassifierThresholds, RegimeReport, classify_regime
from .errors import DivergenceError, ValidationError
from .export import format_number
from .integrator import TrajectorySet, integrate
from .model import ParamPath, Scenario

DIVERGENCE_PENALTY = 1e12


@dataclass(frozen=True)
class AxisSpec:
    path: str
    lo: float
    hi: float
    steps: int

    def __post_init__(self):
        object.__setattr__(self, "path", str(ParamPath.parse(self.path)))
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or self.lo > self.hi:
            raise ValidationError(f"axis {self.path}: need finite lo <= hi", field=self.path)
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValidationError(f"axis {self.path}: steps must be an integer >= 1", field=self.path)
        object.__setattr__(self, "steps", int(self.steps))

    @classmethod
    def parse(cls, text: str) -> "AxisSpec":
        """``PATH:LO:HI:STEPS``."""
        parts = text.split(":")
        if len(parts) != 4:
            raise ValidationError(f"axis {text!r} is not PATH:LO:HI:STEPS", field="axis")
        try:
            return cls(parts[0], float(parts[1]), float(parts[2]), int(parts[3]))
        except ValueError:
            raise ValidationError(f"axis {text!r} has a non-numeric bound or step count", field="axis") from None

    def values(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([self.lo])
        return np.linspace(self.lo, self.hi, self.steps)


@dataclass(frozen=True)
class RegimeMap:
    """Reports over a grid; ``reports`` is flat in row-major axis order."""

    axes: tuple[AxisSpec, ...]
    reports: tuple[RegimeReport, ...]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.steps for a in self.axes)

    def labels(self) -> np.ndarray:
        return np.array([r.label.value for r in self.reports], dtype=object).reshape(self.shape)

    def cells(self):
        """``(coordinates, report)`` pairs in canonical order."""
        grids = [a.values() for a in self.axes]
        return zip(itertools.product(*grids), self.reports)

    def to_csv(self) -> str:
        metric_names = ("oscillation_count", "relative_amplitude", "relative_amplitude_early",
                        "relative_amplitude_late", "d_trend_late", "s_monotone_fraction",
                        "late_d_change", "total_growth")
        lines = [",".join([a.path for a in self.axes] + ["label", *metric_names])]
        for coords, report in self.cells():
            m = report.metrics
            row = [format_number(c) for c in coords] + [report.label.value]
            row += [format_number(getattr(m, name)) for name in metric_names]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


def simulate_and_classify(scenario: Scenario, culture: int = 0,
                          thresholds: ClassifierThresholds | None = None) -> RegimeReport:
    """Integrate and classify; a blow-up yields a ``Divergent`` report."""
    try:
        trajectory = integrate(scenario)
    except DivergenceError as exc:
        trajectory = exc.trajectory
    return classify_regime(trajectory, culture, thresholds)


def _grid_scenarios(base: Scenario, axes: Sequence[AxisSpec]):
    for coords in itertools.product(*(a.values() for a in axes)):
        scenario = base
        for axis, value in zip(axes, coords):
            scenario = scenario.with_value(axis.path, value)
        yield scenario


def run_sweep(base: Scenario, axes: Sequence[AxisSpec], thresholds: ClassifierThresholds | None = None,
              culture: int = 0, workers: int = 1) -> RegimeMap:
    """Classify ``culture`` at every grid point.

    With ``workers > 1`` the cells run on a thread pool; output order (and
    content) does not depend on scheduling.
    """
    axes = tuple(axes)
    if not axes:
        raise ValidationError("at least one axis is required", field="axes")
    for axis in axes:
        ParamPath.parse(axis.path).check(base)
    if not 0 <= culture < base.n_cultures:
        raise ValidationError(f"culture index {culture} out of range", field="culture")
    # validate every cell up front so a bad value fails before any work starts
    scenarios = list(_grid_scenarios(base, axes))

    def job(scenario):
        return simulate_and_classify(scenario, culture, thresholds)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(job, scenarios))
    else:
        reports = [job(s) for s in scenarios]
    return RegimeMap(axes, tuple(reports))


def trace_regime_boundary(base: Scenario, axis: AxisSpec, tol: float,
                          thresholds: ClassifierThresholds | None = None, culture: int = 0) -> float:
    """Bisect between ``axis.lo`` and ``axis.hi`` for the point where the label changes.

    The lo-side label is kept on the lo side throughout; anything else (including
    a third label) counts as the hi side. Returns the midpoint of the final
    bracket, whose width is at most ``tol``.
    """
    if not tol > 0:
        raise ValidationError("tol must be > 0", field="tol")

    def label(value):
        return simulate_and_classify(base.with_value(axis.path, value), culture, thresholds).label

    lo, hi = float(axis.lo), float(axis.hi)
    lo_label = label(lo)
    if label(hi) == lo_label:
        raise ValidationError(f"no boundary bracketed: both ends are {lo_label.value}", field=axis.path)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if label(mid) == lo_label:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# -- fitting -----------------------------------------------------------------

@dataclass(frozen=True)
class FitResult:
    """Fitted scenario plus the values of the free parameters."""

    scenario: Scenario
    values: dict[str, float]
    residual: float
    iterations: int
    converged: bool

    def to_dict(self) -> dict:
        return {"values": dict(self.values), "residual": self.residual,
                "iterations": self.iterations, "converged": self.converged}


def fit_residual(observed: TrajectorySet, simulated: TrajectorySet) -> float:
    """RMS mismatch of D and S, each scaled by its observed peak magnitude."""
    parts = []
    for obs, sim in ((observed.D, simulated.D), (observed.S, simulated.S)):
        scale = np.max(np.abs(obs), axis=0)
        scale = np.where(scale > 0, scale, 1.0)
        parts.append(((sim - obs) / scale).ravel())
    diff = np.concatenate(parts)
    return float(np.sqrt(np.mean(diff * diff)))


def _same_grid(observed: TrajectorySet, template: Scenario) -> bool:
    if observed.n_cultures != template.n_cultures or len(observed) != template.n_samples:
        return False
    expected = np.arange(template.n_samples) * template.sample_every
    return bool(np.allclose(observed.times, expected, rtol=1e-9, atol=1e-9 * template.sample_every))


def _prefix(trajectory: TrajectorySet, m: int) -> TrajectorySet:
    return TrajectorySet(trajectory.scenario, trajectory.times[:m], trajectory.D[:m],
                         trajectory.S[:m], trajectory.H[:m])


def fit_parameters(observed: TrajectorySet, template: Scenario, free: Sequence[str], seed: int = 0,
                   max_iter: int = 2000, xtol: float = 1e-8,
                   stages: Sequence[float] = (0.1, 0.3, 1.0)) -> FitResult:
    """Nelder-Mead least-squares fit of the ``free`` parameters to ``observed``.

    Search coordinates are offsets relative to the template values, so ``xtol``
    bounds the simplex size relative to the parameters. Trial points that are
    invalid or blow up score ``DIVERGENCE_PENALTY``.

    Oscillatory data give a rugged objective once the simulated phase drifts,
    so the search runs on growing prefixes of the data (``stages`` are fractions
    of the observed span, the last must be 1) and warm-starts each from the
    previous optimum. ``max_iter`` caps the iterations of all stages together.
    The reported residual is always over the full series.
    """
    if not free:
        raise ValidationError("no free parameters", field="free")
    if not stages or stages[-1] != 1.0 or any(not 0 < f <= 1 for f in stages):
        raise ValidationError("stages must be fractions in (0, 1] ending with 1", field="stages")
    paths = [str(ParamPath.parse(p).check(template)) for p in free]
    if len(set(paths)) != len(paths):
        raise ValidationError("free parameters repeat", field="free")
    if not _same_grid(observed, template):
        raise ValidationError("observed trajectory and template do not share a sampling grid", field="observed")

    start = np.array([template.get(p) for p in paths])
    scale = np.where(start != 0, np.abs(start), 1.0)

    def scenario_at(z, base=template):
        s = base
        for path, value in zip(paths, start + scale * z):
            s = s.with_value(path, value)
        return s

    def make_objective(obs, base):
        def objective(z):
            try:
                return fit_residual(obs, integrate(scenario_at(z, base)))
            except (ValidationError, DivergenceError):
                return DIVERGENCE_PENALTY
        return objective

    z = np.zeros(len(paths))
    r0 = make_objective(observed, template)(z)
    if r0 <= 1e-12:
        return FitResult(template, dict(zip(paths, start.tolist())), r0, 0, True)

    rng = np.random.default_rng(seed)
    steps = rng.uniform(0.05, 0.1, len(paths)) * rng.choice([-1.0, 1.0], len(paths))
    used = 0
    success = False
    n = len(observed)
    for fraction in stages:
        m = max(3, int(round(fraction * (n - 1))) + 1) if fraction < 1 else n
        m = min(m, n)
        base = template.replace(horizon=(m - 1) * template.sample_every) if m < n else template
        budget = max_iter - used
        if budget <= 0:
            success = False
            break
        res = minimize(make_objective(_prefix(observed, m), base), z, method="Nelder-Mead",
                       options={"initial_simplex": np.vstack([z, z + np.diag(steps)]),
                                "maxiter": budget, "maxfev": 10 * budget,
                                "xatol": xtol, "fatol": math.inf})
        z = res.x
        used += int(res.nit)
        success = bool(res.success)
    best = scenario_at(z)
    residual = make_objective(observed, template)(z)
    return FitResult(best, {p: best.get(p) for p in paths}, residual, used, success)
