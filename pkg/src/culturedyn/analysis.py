"""Oscillation metrics and regime classification of sampled trajectories."""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.signal import find_peaks

from .errors import ValidationError
from .integrator import TrajectorySet


class Regime(str, enum.Enum):
    CONCEPTUAL_OSCILLATORY = "ConceptualOscillatory"
    TRADITIONAL_STAGNATING = "TraditionalStagnating"
    STABILIZED_MULTICULTURAL = "StabilizedMulticultural"
    DIVERGENT = "Divergent"
    UNDETERMINED = "Undetermined"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ExtremaList:
    """Prominence-filtered extrema as ``(time, value)`` pairs plus sample indices."""

    maxima: tuple[tuple[float, float], ...]
    minima: tuple[tuple[float, float], ...]
    max_index: tuple[int, ...] = ()
    min_index: tuple[int, ...] = ()

    def merged(self) -> list[tuple[int, int]]:
        """``(index, +1 for max / -1 for min)`` in time order."""
        return sorted([(i, 1) for i in self.max_index] + [(i, -1) for i in self.min_index])


def find_extrema(series, min_prominence: float, times=None) -> ExtremaList:
    """Interior local extrema whose prominence is at least ``min_prominence``
    times the series range. Endpoints are never extrema; a constant series has none.
    """
    y = np.asarray(series, dtype=np.float64)
    if y.ndim != 1 or len(y) < 3:
        raise ValidationError("series needs at least 3 samples", field="series")
    if not 0 < min_prominence <= 1:
        raise ValidationError("min_prominence must lie in (0, 1]", field="min_prominence")
    t = np.arange(len(y), dtype=np.float64) if times is None else np.asarray(times, dtype=np.float64)
    span = float(np.max(y) - np.min(y))
    if span == 0.0:
        return ExtremaList((), ())
    threshold = min_prominence * span
    pk, _ = find_peaks(y, prominence=threshold)
    tr, _ = find_peaks(-y, prominence=threshold)
    return ExtremaList(
        tuple((float(t[i]), float(y[i])) for i in pk),
        tuple((float(t[i]), float(y[i])) for i in tr),
        tuple(int(i) for i in pk),
        tuple(int(i) for i in tr),
    )


def relative_amplitude(series) -> float:
    """(max - min) / max: the fraction of the peak lost in the swing."""
    y = np.asarray(series, dtype=np.float64)
    if y.size == 0:
        raise ValidationError("empty window", field="series")
    top = float(np.max(y))
    if top <= 0:
        raise ValidationError("amplitude undefined for non-positive peak", field="series")
    return (top - float(np.min(y))) / top


def cycle_swing(series, extrema: ExtremaList, times, window: tuple[float, float]) -> float:
    """Mean relative swing between consecutive extrema inside ``window``.

    Each swing between a neighbouring maximum and minimum is scaled by the
    higher of the two, so a steady trend does not count as oscillation.
    Returns 0 when the window holds no complete swing.
    """
    y = np.asarray(series, dtype=np.float64)
    t = np.asarray(times, dtype=np.float64)
    lo, hi = window
    inside = [i for i, _ in extrema.merged() if lo <= t[i] <= hi]
    swings = []
    for i, j in zip(inside[:-1], inside[1:]):
        top = max(y[i], y[j])
        if top > 0:
            swings.append(abs(y[i] - y[j]) / top)
    return float(np.mean(swings)) if swings else 0.0


def cycle_means(series, extrema: ExtremaList, times) -> list[tuple[float, float]]:
    """Time-averaged value of each trough-to-trough cycle as ``(mid time, mean)``."""
    y = np.asarray(series, dtype=np.float64)
    t = np.asarray(times, dtype=np.float64)
    out = []
    troughs = extrema.min_index
    for i, j in zip(troughs[:-1], troughs[1:]):
        mean = float(np.trapezoid(y[i:j + 1], t[i:j + 1]) / (t[j] - t[i]))
        out.append((0.5 * (t[i] + t[j]), mean))
    return out


def _relative_slope(t, v) -> float:
    t = np.asarray(t, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if len(t) < 2 or np.ptp(t) == 0:
        return 0.0
    scale = float(np.mean(np.abs(v)))
    if scale == 0 or np.ptp(v) <= 1e-12 * scale:
        # flat to rounding: polyfit would return noise of either sign
        return 0.0
    return float(np.polyfit(t, v, 1)[0] / scale)


@dataclass(frozen=True)
class ClassifierThresholds:
    """Cut-offs turning qualitative regime descriptions into tests.

    ``early_window`` is an absolute end time; ``late_window_fraction`` is the
    trailing share of the horizon treated as late.
    """

    min_oscillations: int = 2
    amp_oscillatory: float = 0.5
    amp_subsided: float = 0.5
    plateau_tol: float = 0.05
    late_window_fraction: float = 0.5
    s_monotone_min: float = 0.9
    min_prominence: float = 0.1
    early_window: float = 2.0

    def __post_init__(self):
        if int(self.min_oscillations) != self.min_oscillations or self.min_oscillations < 1:
            raise ValidationError("min_oscillations must be an integer >= 1", field="min_oscillations")
        for name in ("amp_oscillatory", "amp_subsided", "plateau_tol", "late_window_fraction",
                     "s_monotone_min", "min_prominence"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValidationError(f"{name} must lie in (0, 1], got {v!r}", field=name)
        if not self.early_window > 0:
            raise ValidationError("early_window must be > 0", field="early_window")


@dataclass(frozen=True)
class CultureMetrics:
    oscillation_count: int
    relative_amplitude: float
    relative_amplitude_early: float
    relative_amplitude_late: float
    d_trend_late: float
    s_monotone_fraction: float
    late_d_change: float
    total_growth: float

    @property
    def subsided_ratio(self) -> float:
        if self.relative_amplitude_early == 0:
            return math.inf
        return self.relative_amplitude_late / self.relative_amplitude_early


@dataclass(frozen=True)
class RegimeReport:
    """Regime label of one culture and the metrics behind it.

    ``relative_amplitude`` spans the whole trajectory; the early/late values are
    mean cycle swings (see :func:`cycle_swing`). ``d_trend_late`` is the slope of
    the cycle-averaged D over the late window, divided by its mean.
    ``total_growth`` compares the late-window mean of D with its initial value.
    """

    label: Regime
    culture: int
    metrics: CultureMetrics

    def to_dict(self) -> dict:
        return {"culture": self.culture, "label": self.label.value, **asdict(self.metrics)}


_ZERO_METRICS = CultureMetrics(0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


def culture_metrics(trajectory: TrajectorySet, culture: int,
                    thresholds: ClassifierThresholds | None = None) -> CultureMetrics:
    th = thresholds or ClassifierThresholds()
    t = trajectory.times
    D = trajectory.D[:, culture]
    S = trajectory.S[:, culture]
    if len(t) < 3 or np.max(D) <= 0:
        return _ZERO_METRICS
    end = float(t[-1])
    late = (end * (1 - th.late_window_fraction), end)
    late_mask = t >= late[0]

    ext = find_extrema(D, th.min_prominence, t)
    full_amp = relative_amplitude(D)
    early_amp = cycle_swing(D, ext, t, (0.0, th.early_window))
    late_amp = cycle_swing(D, ext, t, late)

    late_cycles = [c for c in cycle_means(D, ext, t) if c[0] >= late[0]]
    if len(late_cycles) >= 2:
        trend = _relative_slope(*zip(*late_cycles))
    else:
        trend = _relative_slope(t[late_mask], D[late_mask])

    late_d = D[late_mask]
    late_change = relative_amplitude(late_d) if np.max(late_d) > 0 else 0.0
    ds = np.diff(S[late_mask])
    s_mono = float(np.mean(ds >= 0)) if ds.size else 0.0
    late_mean = float(np.trapezoid(late_d, t[late_mask]) / (end - late[0])) if end > late[0] else float(late_d[-1])
    growth = late_mean / float(D[0]) - 1 if D[0] > 0 else math.inf
    return CultureMetrics(
        oscillation_count=len(ext.maxima),
        relative_amplitude=full_amp,
        relative_amplitude_early=early_amp,
        relative_amplitude_late=late_amp,
        d_trend_late=trend,
        s_monotone_fraction=s_mono,
        late_d_change=late_change,
        total_growth=growth,
    )


def _has_subsided(m: CultureMetrics, th: ClassifierThresholds) -> bool:
    return m.relative_amplitude_early >= th.amp_oscillatory and m.subsided_ratio <= th.amp_subsided


def classify_regime(trajectory: TrajectorySet, culture: int = 0,
                    thresholds: ClassifierThresholds | None = None) -> RegimeReport:
    """Label one culture's trajectory.

    Tests, in order: divergence; for coupled cultures, early swings (in this
    culture or a partner) that later subside while D keeps growing; sustained
    large oscillation; a D plateau under rising synthesis. Anything else is
    ``Undetermined``.
    """
    th = thresholds or ClassifierThresholds()
    if not 0 <= culture < trajectory.n_cultures:
        raise ValidationError(f"culture index {culture} out of range", field="culture")
    if trajectory.diverged:
        return RegimeReport(Regime.DIVERGENT, culture, _ZERO_METRICS)

    m = culture_metrics(trajectory, culture, th)
    partners = trajectory.scenario.coupling.partners(culture)
    if partners and m.d_trend_late > 0:
        group = (culture,) + partners
        if any(_has_subsided(culture_metrics(trajectory, j, th) if j != culture else m, th) for j in group):
            return RegimeReport(Regime.STABILIZED_MULTICULTURAL, culture, m)
    if m.oscillation_count >= th.min_oscillations and m.relative_amplitude >= th.amp_oscillatory:
        return RegimeReport(Regime.CONCEPTUAL_OSCILLATORY, culture, m)
    if m.late_d_change <= th.plateau_tol and m.s_monotone_fraction >= th.s_monotone_min:
        return RegimeReport(Regime.TRADITIONAL_STAGNATING, culture, m)
    return RegimeReport(Regime.UNDETERMINED, culture, m)


def classify_all(trajectory: TrajectorySet, thresholds: ClassifierThresholds | None = None) -> list[RegimeReport]:
    return [classify_regime(trajectory, k, thresholds) for k in range(trajectory.n_cultures)]
