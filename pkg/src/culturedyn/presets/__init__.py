"""Scenarios with the coefficients and initial values of the three reference figures.

The same scenarios ship as scenario files (``fig1a.scn`` ...) next to this module.
"""

from __future__ import annotations

from importlib import resources

from ..analysis import Regime
from ..model import CouplingMatrices, CultureParams, CultureState, Scenario

FIGURES = ("fig1a", "fig1b", "fig2")

EXPECTED_REGIME = {
    "fig1a": Regime.CONCEPTUAL_OSCILLATORY,
    "fig1b": Regime.TRADITIONAL_STAGNATING,
    "fig2": Regime.STABILIZED_MULTICULTURAL,
}


def fig1a() -> Scenario:
    """Moderate synthesis: knowledge grows on average but crashes periodically."""
    p = CultureParams(a=10, b=1, d=10, e=0.1, s0=2, s1=10, h0=1)
    return Scenario(((p, CultureState(10, 3)),))


def fig1b() -> Scenario:
    """High initial synthesis: synthesis keeps rising while knowledge levels off."""
    p = CultureParams(a=10, b=1, d=10, e=1, s0=1, s1=10, h0=10)
    return Scenario(((p, CultureState(3, 50)),))


def fig2() -> Scenario:
    """Two cultures exchanging D and S at x = y = 0.5."""
    first = CultureParams(a=2, b=1, d=10, e=1, s0=1, s1=10, h0=12)
    second = CultureParams(a=2, b=1, d=10, e=1, s0=1, s1=10, h0=10)
    return Scenario(
        ((first, CultureState(30, 2)), (second, CultureState(3, 50))),
        coupling=CouplingMatrices.uniform(2, 0.5, 0.5),
    )


def preset(identifier: str) -> Scenario:
    try:
        return {"fig1a": fig1a, "fig1b": fig1b, "fig2": fig2}[identifier]()
    except KeyError:
        from ..errors import ValidationError
        raise ValidationError(f"unknown figure {identifier!r}; choose from {', '.join(FIGURES)}",
                              field="identifier") from None


def preset_file_text(identifier: str) -> str:
    preset(identifier)
    return resources.files(__package__).joinpath(f"{identifier}.scn").read_text()
