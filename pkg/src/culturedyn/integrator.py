"""Fixed-step classical RK4 integration of a :class:`Scenario`."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConvergenceError, DivergenceError, ValidationError
from .model import Scenario, _rhs_into, params_matrix

# Clamp events beyond this many are counted but not stored individually.
MAX_STORED_EVENTS = 10_000

CLAMPED_D = "clamped_D"


@dataclass(frozen=True)
class ClampEvent:
    time: float
    culture: int
    kind: str = CLAMPED_D


@dataclass(frozen=True, eq=False)
class TrajectorySet:
    """Sampled series of every culture.

    ``D``, ``S`` and ``H`` have shape ``(n_samples, n_cultures)``. A trajectory
    cut short by a blow-up has ``diverged_at`` set to the failure time.
    """

    scenario: Scenario
    times: np.ndarray
    D: np.ndarray
    S: np.ndarray
    H: np.ndarray
    events: tuple[ClampEvent, ...] = ()
    n_clamps: int = 0
    diverged_at: float | None = None

    def __post_init__(self):
        for name in ("times", "D", "S", "H"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_cultures(self) -> int:
        return self.D.shape[1]

    @property
    def diverged(self) -> bool:
        return self.diverged_at is not None

    def __len__(self):
        return len(self.times)

    def identical(self, other: "TrajectorySet") -> bool:
        """Bitwise equality of all sampled values and events."""
        return (
            self.times.tobytes() == other.times.tobytes()
            and self.D.tobytes() == other.D.tobytes()
            and self.S.tobytes() == other.S.tobytes()
            and self.H.tobytes() == other.H.tobytes()
            and self.events == other.events
            and self.diverged_at == other.diverged_at
        )


@njit(cache=True, nogil=True)
def _rk4_kernel(params, x, y, d_init, s_init, dt, stride, n_samples, out_d, out_s, ev_step, ev_cult):
    """Advance and sample. Returns (samples written, clamp count, failing step or -1)."""
    n = d_init.shape[0]
    dc = d_init.copy()
    sy = s_init.copy()
    k1d = np.empty(n); k1s = np.empty(n)
    k2d = np.empty(n); k2s = np.empty(n)
    k3d = np.empty(n); k3s = np.empty(n)
    k4d = np.empty(n); k4s = np.empty(n)
    td = np.empty(n); ts = np.empty(n)
    half = 0.5 * dt
    n_events = 0
    for k in range(n):
        out_d[0, k] = dc[k]
        out_s[0, k] = sy[k]
    step = 0
    for sample in range(1, n_samples):
        for _ in range(stride):
            t = step * dt
            _rhs_into(t, dc, sy, params, x, y, k1d, k1s)
            for k in range(n):
                td[k] = dc[k] + half * k1d[k]
                ts[k] = sy[k] + half * k1s[k]
            _rhs_into(t + half, td, ts, params, x, y, k2d, k2s)
            for k in range(n):
                td[k] = dc[k] + half * k2d[k]
                ts[k] = sy[k] + half * k2s[k]
            _rhs_into(t + half, td, ts, params, x, y, k3d, k3s)
            for k in range(n):
                td[k] = dc[k] + dt * k3d[k]
                ts[k] = sy[k] + dt * k3s[k]
            _rhs_into(t + dt, td, ts, params, x, y, k4d, k4s)
            step += 1
            for k in range(n):
                dc[k] += dt / 6.0 * (k1d[k] + 2.0 * k2d[k] + 2.0 * k3d[k] + k4d[k])
                sy[k] += dt / 6.0 * (k1s[k] + 2.0 * k2s[k] + 2.0 * k3s[k] + k4s[k])
                if not (math.isfinite(dc[k]) and math.isfinite(sy[k])):
                    return sample, n_events, step
                if dc[k] < 0.0:
                    dc[k] = 0.0
                    if n_events < ev_step.shape[0]:
                        ev_step[n_events] = step
                        ev_cult[n_events] = k
                    n_events += 1
        for k in range(n):
            out_d[sample, k] = dc[k]
            out_s[sample, k] = sy[k]
    return n_samples, n_events, -1


def integrate(scenario: Scenario) -> TrajectorySet:
    """Integrate ``scenario`` from t = 0 to the last sample time.

    Sample times are ``i * sample_every`` for ``i = 0 .. floor(horizon/sample_every)``.
    Identical scenarios give bit-identical results.

    Raises :class:`DivergenceError` (carrying the partial trajectory) if any
    state becomes non-finite.
    """
    n = scenario.n_cultures
    n_samples = scenario.n_samples
    stride = scenario.stride
    x, y = scenario.coupling.as_arrays()
    d0 = np.array([s.d_concepts for s in scenario.initial_states])
    s0 = np.array([s.s_synthesis for s in scenario.initial_states])
    out_d = np.empty((n_samples, n))
    out_s = np.empty((n_samples, n))
    ev_step = np.empty(MAX_STORED_EVENTS, dtype=np.int64)
    ev_cult = np.empty(MAX_STORED_EVENTS, dtype=np.int64)
    written, n_events, fail_step = _rk4_kernel(
        params_matrix(scenario), x, y, d0, s0, scenario.dt, stride, n_samples,
        out_d, out_s, ev_step, ev_cult)

    times = np.arange(written) * scenario.sample_every
    params = scenario.params
    hier = np.column_stack([p.h0 + p.e * times for p in params])
    events = tuple(
        ClampEvent(float(ev_step[i] * scenario.dt), int(ev_cult[i]))
        for i in range(min(n_events, MAX_STORED_EVENTS))
    )
    traj = TrajectorySet(
        scenario, times, out_d[:written], out_s[:written], hier, events, n_events,
        diverged_at=None if fail_step < 0 else fail_step * scenario.dt,
    )
    if fail_step >= 0:
        raise DivergenceError(fail_step * scenario.dt, traj)
    return traj


def max_relative_change(coarse: TrajectorySet, fine: TrajectorySet) -> float:
    """Largest change of any D or S series, scaled by that series' peak magnitude."""
    worst = 0.0
    for old, new in ((coarse.D, fine.D), (coarse.S, fine.S)):
        scale = np.maximum(np.max(np.abs(old), axis=0), np.finfo(float).tiny)
        worst = max(worst, float(np.max(np.abs(new - old) / scale)))
    return worst


def refine_until_converged(scenario: Scenario, tol: float, max_halvings: int = 12):
    """Halve ``dt`` until successive trajectories agree to ``tol``.

    Agreement is measured by :func:`max_relative_change` on the shared sample
    grid (``sample_every`` is kept fixed). Returns ``(dt_used, trajectory)``.
    """
    if not tol > 0:
        raise ValidationError("tol must be > 0", field="tol")
    previous = integrate(scenario)
    dt = scenario.dt
    for _ in range(max_halvings):
        dt /= 2
        current = integrate(scenario.replace(dt=dt))
        if max_relative_change(previous, current) < tol:
            return dt, current
        previous = current
    raise ConvergenceError(f"no convergence after {max_halvings} halvings")
