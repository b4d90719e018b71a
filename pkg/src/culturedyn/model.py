"""Domain types and the right-hand side of the differentiation/synthesis system.

For each culture ``k`` the state is the number of concepts ``D`` and the
synthesis level ``S``; the hierarchy ``H`` is a prescribed linear function of
time. With coupling tables ``x`` and ``y`` (row = receiver, column = source)::

    dD_k/dt = a_k D_k G_k(S_k) + sum_{j != k} x[k][j] D_j
    dS_k/dt = -b_k D_k + d_k H_k(t) + sum_{j != k} y[k][j] S_j
    G_k(S)  = (S - s0_k) exp(-(S - s0_k) / s1_k)
    H_k(t)  = h0_k + e_k t
"""

from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from numba import njit

from .errors import ValidationError

PARAM_KEYS = ("a", "b", "d", "e", "s0", "s1", "h0")
STATE_KEYS = ("d0", "s_init")
CULTURE_KEYS = PARAM_KEYS + STATE_KEYS


def _check_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}", field=name)
    return value


@dataclass(frozen=True)
class CultureParams:
    """Coefficients of one culture.

    ``a`` growth rate, ``b`` synthesis depletion per concept, ``d`` hierarchy
    support, ``e`` hierarchy growth rate, ``s0`` synthesis threshold, ``s1``
    synthesis scale, ``h0`` initial hierarchy level. Units are arbitrary.
    """

    a: float
    b: float
    d: float
    e: float
    s0: float
    s1: float
    h0: float

    def __post_init__(self):
        for key in PARAM_KEYS:
            object.__setattr__(self, key, _check_finite(key, getattr(self, key)))
        if self.s1 <= 0:
            raise ValidationError(f"s1 must be > 0, got {self.s1!r}", field="s1")
        for key in ("a", "b", "d", "e"):
            if getattr(self, key) < 0:
                raise ValidationError(f"{key} must be >= 0, got {getattr(self, key)!r}", field=key)

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, k) for k in PARAM_KEYS], dtype=np.float64)


@dataclass(frozen=True)
class CultureState:
    """Instantaneous number of concepts and synthesis level of one culture."""

    d_concepts: float
    s_synthesis: float

    def __post_init__(self):
        d = _check_finite("d_concepts", self.d_concepts)
        s = _check_finite("s_synthesis", self.s_synthesis)
        if d < 0:
            raise ValidationError(f"d_concepts must be >= 0, got {d!r}", field="d_concepts")
        object.__setattr__(self, "d_concepts", d)
        object.__setattr__(self, "s_synthesis", s)


def _as_table(name: str, rows) -> tuple[tuple[float, ...], ...]:
    table = tuple(tuple(float(v) for v in row) for row in rows)
    n = len(table)
    for k, row in enumerate(table):
        if len(row) != n:
            raise ValidationError(f"coupling table {name} must be square", field=name)
        for j, v in enumerate(row):
            if not math.isfinite(v) or v < 0:
                raise ValidationError(f"{name}.{k}.{j} must be finite and >= 0, got {v!r}", field=f"{name}.{k}.{j}")
            if k == j and v != 0.0:
                raise ValidationError(f"{name}.{k}.{k} must be 0 (no self-exchange)", field=f"{name}.{k}.{k}")
    return table


@dataclass(frozen=True)
class CouplingMatrices:
    """Exchange coefficients between cultures; ``x[k][j]`` feeds culture j's D into culture k."""

    x: tuple[tuple[float, ...], ...]
    y: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        x = _as_table("x", self.x)
        y = _as_table("y", self.y)
        if len(x) != len(y):
            raise ValidationError("coupling tables x and y differ in size", field="y")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def size(self) -> int:
        return len(self.x)

    @classmethod
    def zeros(cls, n: int) -> "CouplingMatrices":
        z = tuple(tuple(0.0 for _ in range(n)) for _ in range(n))
        return cls(z, z)

    @classmethod
    def uniform(cls, n: int, x: float, y: float) -> "CouplingMatrices":
        """Every culture exchanges with every other at the same rates."""
        def table(v):
            return tuple(tuple(0.0 if k == j else v for j in range(n)) for k in range(n))
        return cls(table(x), table(y))

    def partners(self, k: int) -> tuple[int, ...]:
        """Cultures exchanging with ``k`` in either direction."""
        return tuple(
            j for j in range(self.size)
            if j != k and (self.x[k][j] > 0 or self.y[k][j] > 0 or self.x[j][k] > 0 or self.y[j][k] > 0)
        )

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array(self.x, dtype=np.float64).reshape(self.size, self.size), \
            np.array(self.y, dtype=np.float64).reshape(self.size, self.size)


def _is_integer_multiple(ratio: float) -> bool:
    return abs(ratio - round(ratio)) <= 1e-9 * max(1.0, ratio)


@dataclass(frozen=True)
class Scenario:
    """Cultures, their initial states, coupling and integration settings."""

    cultures: tuple[tuple[CultureParams, CultureState], ...]
    coupling: CouplingMatrices | None = None
    horizon: float = 10.0
    dt: float = 1e-3
    sample_every: float = 1e-2

    def __post_init__(self):
        cultures = tuple((p, s) for p, s in self.cultures)
        if not cultures:
            raise ValidationError("a scenario needs at least one culture", field="cultures")
        for p, s in cultures:
            if not isinstance(p, CultureParams) or not isinstance(s, CultureState):
                raise ValidationError("cultures must hold (CultureParams, CultureState) pairs", field="cultures")
        object.__setattr__(self, "cultures", cultures)
        coupling = self.coupling if self.coupling is not None else CouplingMatrices.zeros(len(cultures))
        if coupling.size != len(cultures):
            raise ValidationError(
                f"coupling is {coupling.size}x{coupling.size} but there are {len(cultures)} cultures",
                field="coupling")
        object.__setattr__(self, "coupling", coupling)
        horizon = _check_finite("horizon", self.horizon)
        dt = _check_finite("dt", self.dt)
        sample_every = _check_finite("sample_every", self.sample_every)
        if horizon < 0:
            raise ValidationError("horizon must be >= 0", field="horizon")
        if dt <= 0:
            raise ValidationError("dt must be > 0", field="dt")
        if sample_every < dt * (1 - 1e-9):
            raise ValidationError("sample_every must be >= dt", field="sample_every")
        if not _is_integer_multiple(sample_every / dt):
            raise ValidationError("sample_every must be an integer multiple of dt", field="sample_every")
        object.__setattr__(self, "horizon", horizon)
        object.__setattr__(self, "dt", dt)
        object.__setattr__(self, "sample_every", sample_every)

    @property
    def n_cultures(self) -> int:
        return len(self.cultures)

    @property
    def params(self) -> tuple[CultureParams, ...]:
        return tuple(p for p, _ in self.cultures)

    @property
    def initial_states(self) -> tuple[CultureState, ...]:
        return tuple(s for _, s in self.cultures)

    @property
    def stride(self) -> int:
        """Integration steps per output sample."""
        return int(round(self.sample_every / self.dt))

    @property
    def n_samples(self) -> int:
        return int(math.floor(self.horizon / self.sample_every + 1e-9)) + 1

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)

    def get(self, path: str) -> float:
        return get_value(self, path)

    def with_value(self, path: str, value: float) -> "Scenario":
        return set_value(self, path, value)


class DerivativeVector(NamedTuple):
    """Time derivatives of D and S, one entry per culture."""

    dd_dt: np.ndarray
    ds_dt: np.ndarray


# -- parameter paths ---------------------------------------------------------

_CULTURE_PATH = re.compile(r"^(?:culture\.(\d+)\.)?(" + "|".join(CULTURE_KEYS) + r")$")
_COUPLING_PATH = re.compile(r"^([xy])\.(\d+)\.(\d+)$")


@dataclass(frozen=True)
class ParamPath:
    """A resolved reference to one scalar of a scenario.

    Text forms: ``a`` (culture 0), ``culture.1.s_init``, ``x.0.1``.
    """

    kind: str  # "culture" or "x"/"y"
    index: int
    key: str = ""
    source: int = -1

    @classmethod
    def parse(cls, path: str) -> "ParamPath":
        path = path.strip()
        m = _CULTURE_PATH.match(path)
        if m:
            return cls("culture", int(m.group(1) or 0), m.group(2))
        m = _COUPLING_PATH.match(path)
        if m:
            return cls(m.group(1), int(m.group(2)), source=int(m.group(3)))
        raise ValidationError(f"unknown parameter path {path!r}", field=path)

    def __str__(self):
        if self.kind == "culture":
            return f"culture.{self.index}.{self.key}"
        return f"{self.kind}.{self.index}.{self.source}"

    def check(self, scenario: Scenario) -> "ParamPath":
        n = scenario.n_cultures
        if self.index >= n or (self.kind != "culture" and self.source >= n):
            raise ValidationError(f"path {self} refers to a culture outside 0..{n - 1}", field=str(self))
        if self.kind != "culture" and self.index == self.source:
            raise ValidationError(f"path {self} is a diagonal coupling entry", field=str(self))
        return self


def get_value(scenario: Scenario, path: str | ParamPath) -> float:
    p = (path if isinstance(path, ParamPath) else ParamPath.parse(path)).check(scenario)
    if p.kind == "culture":
        params, state = scenario.cultures[p.index]
        if p.key == "d0":
            return state.d_concepts
        if p.key == "s_init":
            return state.s_synthesis
        return getattr(params, p.key)
    table = scenario.coupling.x if p.kind == "x" else scenario.coupling.y
    return table[p.index][p.source]


def set_value(scenario: Scenario, path: str | ParamPath, value: float) -> Scenario:
    """Return a copy of ``scenario`` with one scalar replaced (validated)."""
    p = (path if isinstance(path, ParamPath) else ParamPath.parse(path)).check(scenario)
    value = float(value)
    if p.kind == "culture":
        cultures = list(scenario.cultures)
        params, state = cultures[p.index]
        if p.key == "d0":
            state = CultureState(value, state.s_synthesis)
        elif p.key == "s_init":
            state = CultureState(state.d_concepts, value)
        else:
            params = dataclasses.replace(params, **{p.key: value})
        cultures[p.index] = (params, state)
        return scenario.replace(cultures=tuple(cultures))
    x = [list(row) for row in scenario.coupling.x]
    y = [list(row) for row in scenario.coupling.y]
    (x if p.kind == "x" else y)[p.index][p.source] = value
    return scenario.replace(coupling=CouplingMatrices(x, y))


# -- right-hand side ---------------------------------------------------------

@njit(cache=True, nogil=True)
def _growth(s, s0, s1):
    u = s - s0
    return u * math.exp(-u / s1)


@njit(cache=True, nogil=True)
def _rhs_into(t, dconc, synth, params, x, y, out_d, out_s):
    """Evaluate the coupled system into ``out_d``/``out_s``.

    ``params`` columns follow ``PARAM_KEYS``.
    """
    n = dconc.shape[0]
    for k in range(n):
        a = params[k, 0]
        b = params[k, 1]
        d = params[k, 2]
        e = params[k, 3]
        h = params[k, 6] + e * t
        dd = a * dconc[k] * _growth(synth[k], params[k, 4], params[k, 5])
        ds = -b * dconc[k] + d * h
        for j in range(n):
            if j != k:
                dd += x[k, j] * dconc[j]
                ds += y[k, j] * synth[j]
        out_d[k] = dd
        out_s[k] = ds


def eval_growth_factor(s: float, params: CultureParams) -> float:
    """G(s) = (s - s0) exp(-(s - s0)/s1).

    Peaks at ``s0 + s1`` with value ``s1/e``; negative below ``s0``.
    """
    if not math.isfinite(s):
        raise ValidationError("non-finite input", field="s")
    u = s - params.s0
    return u * math.exp(-u / params.s1)


def hierarchy_level(params: CultureParams, t: float) -> float:
    """Prescribed hierarchy ``h0 + e t``; not an integrated state."""
    if t < 0:
        raise ValidationError("time before origin", field="t")
    return params.h0 + params.e * t


def params_matrix(scenario: Scenario) -> np.ndarray:
    return np.stack([p.as_array() for p in scenario.params])


def eval_derivatives(states: Sequence[CultureState], scenario: Scenario, t: float) -> DerivativeVector:
    """Derivatives of (D, S) for every culture at time ``t``."""
    if len(states) != scenario.n_cultures:
        raise ValidationError(
            f"expected {scenario.n_cultures} states, got {len(states)}", field="states")
    dconc = np.array([s.d_concepts for s in states], dtype=np.float64)
    synth = np.array([s.s_synthesis for s in states], dtype=np.float64)
    if not (np.all(np.isfinite(dconc)) and np.all(np.isfinite(synth)) and math.isfinite(t)):
        raise ValidationError("non-finite state", field="states")
    x, y = scenario.coupling.as_arrays()
    out_d = np.empty_like(dconc)
    out_s = np.empty_like(synth)
    _rhs_into(float(t), dconc, synth, params_matrix(scenario), x, y, out_d, out_s)
    return DerivativeVector(out_d, out_s)


def single_culture(params: CultureParams, d0: float, s_init: float, **settings) -> Scenario:
    """Convenience constructor for an uncoupled one-culture scenario."""
    return Scenario(((params, CultureState(d0, s_init)),), **settings)
