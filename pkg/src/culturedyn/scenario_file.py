"""Line-oriented scenario documents.

Example::

    # two cultures
    [culture 0]
    a = 2
    ...
    s_init = 2

    [coupling]
    x.0.1 = 0.5

    [integration]
    horizon = 10

Culture sections need every key of ``CULTURE_KEYS`` and must be numbered
0..N-1. Omitted coupling entries are 0; omitted integration settings take the
defaults of :class:`Scenario`.
"""

from __future__ import annotations

import re

from .analysis import ClassifierThresholds
from .errors import ScenarioParseError, ValidationError
from .model import (
    CULTURE_KEYS, PARAM_KEYS, CouplingMatrices, CultureParams, CultureState, Scenario,
)

INTEGRATION_KEYS = ("horizon", "dt", "sample_every")
THRESHOLD_KEYS = (
    "min_oscillations", "amp_oscillatory", "amp_subsided", "plateau_tol",
    "late_window_fraction", "s_monotone_min", "min_prominence", "early_window",
)

_NUMBER = re.compile(r"^[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?$")
_SECTION = re.compile(r"^\[\s*([a-z_]+)(?:\s+(\d+))?\s*\]$")
_COUPLING_KEY = re.compile(r"^([xy])\.(\d+)\.(\d+)$")


def _sections(document: str):
    """Yield ``(line number, section name, index, key, value)`` for each assignment."""
    section = None
    index = None
    for lineno, raw in enumerate(document.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            section = m.group(1)
            index = int(m.group(2)) if m.group(2) is not None else None
            yield lineno, section, index, None, None
            continue
        if "=" not in line:
            raise ScenarioParseError(f"expected 'key = value', got {line!r}", lineno)
        if section is None:
            raise ScenarioParseError("assignment outside any section", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not _NUMBER.match(value):
            raise ScenarioParseError(f"value of {key!r} is not a decimal number: {value!r}", lineno, field=key)
        yield lineno, section, index, key, float(value)


def load_scenario(document: str) -> Scenario:
    """Parse and validate a scenario document."""
    cultures: dict[int, dict[str, float]] = {}
    coupling: dict[tuple[str, int, int], tuple[float, int]] = {}
    integration: dict[str, float] = {}
    seen: dict[tuple, int] = {}
    section_line: dict[int, int] = {}

    for lineno, section, index, key, value in _sections(document):
        if key is None:
            if section == "culture":
                if index is None:
                    raise ScenarioParseError("culture section needs an index, e.g. [culture 0]", lineno)
                if index in cultures:
                    raise ScenarioParseError(f"duplicate section [culture {index}]", lineno)
                cultures[index] = {}
                section_line[index] = lineno
            elif section in ("coupling", "integration"):
                if index is not None:
                    raise ScenarioParseError(f"section [{section}] takes no index", lineno)
            else:
                raise ScenarioParseError(f"unknown section [{section}]", lineno, field=section)
            continue

        tag = (section, index, key)
        if tag in seen:
            raise ScenarioParseError(f"duplicate key {key!r}", lineno, field=key)
        seen[tag] = lineno
        if section == "culture":
            if key not in CULTURE_KEYS:
                raise ScenarioParseError(f"unknown key {key!r} in [culture {index}]", lineno, field=key)
            cultures[index][key] = value
        elif section == "coupling":
            m = _COUPLING_KEY.match(key)
            if not m:
                raise ScenarioParseError(f"unknown key {key!r} in [coupling]", lineno, field=key)
            coupling[(m.group(1), int(m.group(2)), int(m.group(3)))] = (value, lineno)
        else:
            if key not in INTEGRATION_KEYS:
                raise ScenarioParseError(f"unknown key {key!r} in [integration]", lineno, field=key)
            integration[key] = value

    if not cultures:
        raise ScenarioParseError("no [culture k] section")
    n = len(cultures)
    if sorted(cultures) != list(range(n)):
        raise ScenarioParseError(f"culture sections must be numbered 0..{n - 1}, got {sorted(cultures)}")

    pairs = []
    for k in range(n):
        values = cultures[k]
        missing = [key for key in CULTURE_KEYS if key not in values]
        if missing:
            raise ScenarioParseError(
                f"[culture {k}] is missing {', '.join(missing)}", section_line[k], field=missing[0])
        try:
            params = CultureParams(**{key: values[key] for key in PARAM_KEYS})
            state = CultureState(values["d0"], values["s_init"])
        except ValidationError as exc:
            name = {"d_concepts": "d0", "s_synthesis": "s_init"}.get(exc.field, exc.field)
            raise ScenarioParseError(f"culture {k}: {exc}", seen.get(("culture", k, name)), field=name) from None
        pairs.append((params, state))

    x = [[0.0] * n for _ in range(n)]
    y = [[0.0] * n for _ in range(n)]
    for (table, k, j), (value, lineno) in coupling.items():
        if k >= n or j >= n:
            raise ScenarioParseError(f"coupling entry {table}.{k}.{j} names a missing culture", lineno,
                                     field=f"{table}.{k}.{j}")
        (x if table == "x" else y)[k][j] = value
    try:
        return Scenario(tuple(pairs), CouplingMatrices(x, y), **integration)
    except ValidationError as exc:
        line = seen.get(("integration", None, exc.field))
        if line is None and exc.field and _COUPLING_KEY.match(exc.field):
            table, k, j = exc.field.split(".")
            line = coupling.get((table, int(k), int(j)), (None, None))[1]
        raise ScenarioParseError(str(exc), line, field=exc.field) from None


def _fmt(value: float) -> str:
    # repr round-trips exactly; drop the trailing ".0" for integers
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") else text


def dump_scenario(scenario: Scenario) -> str:
    """Serialize so that ``load_scenario(dump_scenario(s)) == s``."""
    lines = []
    for k, (params, state) in enumerate(scenario.cultures):
        lines.append(f"[culture {k}]")
        for key in PARAM_KEYS:
            lines.append(f"{key} = {_fmt(getattr(params, key))}")
        lines.append(f"d0 = {_fmt(state.d_concepts)}")
        lines.append(f"s_init = {_fmt(state.s_synthesis)}")
        lines.append("")
    entries = [
        f"{name}.{k}.{j} = {_fmt(table[k][j])}"
        for name, table in (("x", scenario.coupling.x), ("y", scenario.coupling.y))
        for k in range(scenario.n_cultures) for j in range(scenario.n_cultures)
        if table[k][j] != 0
    ]
    if entries:
        lines += ["[coupling]", *entries, ""]
    lines += [
        "[integration]",
        f"horizon = {_fmt(scenario.horizon)}",
        f"dt = {_fmt(scenario.dt)}",
        f"sample_every = {_fmt(scenario.sample_every)}",
    ]
    return "\n".join(lines) + "\n"


def load_thresholds(document: str) -> ClassifierThresholds:
    """Read a ``[thresholds]`` section; omitted keys keep their defaults."""
    values = {}
    for lineno, section, index, key, value in _sections(document):
        if section != "thresholds" or index is not None:
            raise ScenarioParseError(f"expected only a [thresholds] section, got [{section}]", lineno)
        if key is None:
            continue
        if key not in THRESHOLD_KEYS:
            raise ScenarioParseError(f"unknown key {key!r} in [thresholds]", lineno, field=key)
        values[key] = int(value) if key == "min_oscillations" and value.is_integer() else value
    return ClassifierThresholds(**values)
