"""Problem descriptions and the catalog of worked integrals.

Reference values were computed independently to 40 digits with mpmath's
adaptive tanh-sinh quadrature split at the nearby singular points.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import ConfigurationError
from .expr import Expression
from .optimizer import ParameterSolution, beta2_of, optimize_map
from .quadrature import DecayParams
from .transforms import (ConformalTransform, LinearMinusExpMap, OuterKind, OuterMap,
                         plain_de, single_exponential)

HALF_PI = 0.5 * math.pi


def with_gaps(func: Callable) -> Callable:
    """Mark ``func(x, left, right)`` as taking accurate endpoint distances."""
    func.uses_gaps = True
    return func


@dataclass(frozen=True)
class ProblemSpec:
    """An integral over one of the canonical intervals.

    Attributes:
        name: catalog id or file name.
        integrand: vectorized ``f(x)``, or ``f(x, x - a, b - x)`` when
            ``fused_weight`` is set.
        outer: outer map fixing the interval.
        singularities: known singularities, upper-half representatives.
        reference: reference value of the integral, if known.
        expression: source text of the integrand, when it has one.
        fused_weight: the integrand consumes endpoint distances so that the
            endpoint singularity is cancelled by the decaying ``phi'``
            without loss of precision.
        decay: tabulated decay parameters keyed by transform label.
        transforms: transforms that replace the default ``se``/``de`` rules.
    """

    name: str
    integrand: Callable
    outer: OuterMap
    singularities: tuple[complex, ...] = ()
    reference: float | None = None
    expression: str | None = None
    fused_weight: bool = False
    decay: Mapping[str, DecayParams] = field(default_factory=dict)
    transforms: Mapping[str, ConformalTransform] = field(default_factory=dict)

    def transform(self, label: str) -> tuple[ConformalTransform, DecayParams]:
        """Transform and decay parameters for ``se``, ``de`` or ``opt``."""
        if label == "opt":
            sol = self.optimized_map()
            T = ConformalTransform(self.outer, sol.map, "opt")
            return T, DecayParams(1.0, beta2_of(sol.map, self.outer), HALF_PI)
        if label in self.transforms:
            T = self.transforms[label]
        elif label == "de":
            T = plain_de(self.outer)
        elif label == "se":
            T = single_exponential(self.outer)
        else:
            raise ConfigurationError(f"unknown transform {label!r}")
        if label in self.decay:
            return T, self.decay[label]
        if label == "de":
            return T, DecayParams(1.0, beta2_of(T.inner, self.outer), _de_strip(self))
        raise ConfigurationError(f"no decay parameters for transform {label!r} of {self.name}")

    def optimized_map(self, xbar: float = 20.0) -> ParameterSolution:
        if not self.singularities:
            raise ConfigurationError(f"problem {self.name} declares no singularities")
        return optimize_map(self.singularities, self.outer, xbar)


def _de_strip(p: ProblemSpec) -> float:
    """Strip half-width of the plain DE map from the nearest singularity."""
    if not p.singularities:
        return HALF_PI
    d = HALF_PI
    for s in p.singularities:
        w = complex(p.outer.inverse(complex(s)))
        t = np.arcsinh(w / HALF_PI)
        d = min(d, abs(t.imag))
    return d


# --- integrands ------------------------------------------------------------


@with_gaps
def _ex1(x, left, right):
    return (np.exp(1.0 / (1.0 + (x + 0.5) ** 2)) * np.log(right)
            / ((0.25 + (x - 0.5) ** 2) * np.sqrt(left)))


def _ex2(x):
    return (np.exp(10.0 / (1.0 + (x + 2) ** 2)) * np.cos(10.0 / (0.25 + (x + 1) ** 2))
            / ((0.0625 + (x - 1) ** 2) * np.sqrt(1.0 + (x - 2) ** 2)))


def _ex3(x):
    with np.errstate(over="ignore"):
        return x / (1.0 + x ** 6 * np.sinh(x) ** 2)


def _ex4(x):
    return x / (np.sqrt(1.0 + (x - 1) ** 2) * (0.25 + (x - 2) ** 2) * (1.0 / 9.0 + (x - 3) ** 2))


@with_gaps
def _ex5(x, left, right):
    return left * right * np.exp(-x) / (0.25 + (x - 0.5) ** 2)


def _tanh_integral(x):
    x = np.asarray(x, dtype=float)
    safe = np.where(x == 0, 1.0, x)
    return np.where(x == 0, 1.0, np.tanh(safe) / safe) / (1.0 + x ** 2)


# poles of 1/(1 + x^6 sinh^2 x) nearest the half line, to full double precision
EX3_POLES = (
    complex(0.90654846005923186131, 0.34901652849290850023),
    complex(-0.90654846005923186131, 0.34901652849290850023),
    complex(0.032195248855607530349, 3.1425820939241165533),
)


def _build() -> dict[str, ProblemSpec]:
    finite = OuterMap.finite_tanh(-1.0, 1.0)
    unit = OuterMap.finite_tanh(0.0, 1.0)
    real_line = OuterMap.infinite_sinh()
    half_log = OuterMap.semi_inf_log()
    half_exp = OuterMap.semi_inf_exp()
    return {
        "ex1": ProblemSpec(
            "ex1", _ex1, finite, (-0.5 + 1j, 0.5 + 0.5j), -2.0464508116069474869,
            "exp(1/(1+(x+0.5)^2))*log(1-x)/((0.25+(x-0.5)^2)*sqrt(1+x))", True,
            {"se": DecayParams(1, 0.5, 1.10715, False), "de": DecayParams(1, math.pi / 4, 0.34695)}),
        "ex2": ProblemSpec(
            "ex2", _ex2, real_line, (-2 + 1j, -1 + 0.5j, 1 + 0.25j, 2 + 1j), 15.013361987606277010,
            "exp(10/(1+(x+2)^2))*cos(10/(0.25+(x+1)^2))/((0.0625+(x-1)^2)*sqrt(1+(x-2)^2))", False,
            {"se": DecayParams(1, 2.0, 0.35260, False), "de": DecayParams(1, HALF_PI, 0.22640)}),
        "ex3": ProblemSpec(
            "ex3", _ex3, half_log, EX3_POLES, 0.50368666423913851087,
            "x/(1+x^6*sinh(x)^2)", False,
            {"se": DecayParams(1, 2.0, 1.13615, False), "de": DecayParams(0.22, 2.0, 1.58223)},
            {"de": ConformalTransform(half_exp, LinearMinusExpMap(0.22, 0.017), "de")}),
        "ex4": ProblemSpec(
            "ex4", _ex4, half_exp, (1 + 1j, 2 + 0.5j, 3 + 1j / 3), 12.556127264957145752,
            "x/(sqrt(1+(x-1)^2)*(0.25+(x-2)^2)*(1/9+(x-3)^2))", False,
            {"se": DecayParams(1, 2.0, 0.11066, False), "de": DecayParams(1, HALF_PI, 0.05762)}),
        "ex5": ProblemSpec(
            "ex5", _ex5, unit, (0.5 + 0.5j,), 0.35353344301896927053,
            "x*(1-x)*exp(-x)/((0.5)^2+(x-0.5)^2)", True,
            {"se": DecayParams(1, 0.5, HALF_PI, False), "de": DecayParams(1, math.pi / 4, math.pi / 6)}),
        "tanh": ProblemSpec(
            "tanh", _tanh_integral, real_line, (), 2.0797547001201714897,
            "tanh(x)/(x*(1+x^2))", False),
    }


CATALOG: dict[str, ProblemSpec] = _build()

# the Benjamin-Ono test configuration: Lorentzian centres/widths and speed
BO_LORENTZIANS = ((-1.0, 0.3), (0.0, 0.1), (1.0, 0.2))
BO_SPEED = 1.0


def get_problem(name: str) -> ProblemSpec:
    try:
        return CATALOG[name]
    except KeyError:
        raise ConfigurationError(f"unknown catalog problem {name!r}; "
                                 f"choose from {sorted(CATALOG)}") from None


_DOMAINS = {
    "finite": OuterKind.FINITE_TANH,
    "infinite": OuterKind.INFINITE_SINH,
    "semi_log": OuterKind.SEMI_INF_LOG,
    "semi_exp": OuterKind.SEMI_INF_EXP,
}


def problem_from_dict(data: Mapping, name: str = "<problem>") -> ProblemSpec:
    """Build a problem from the JSON problem-file schema.

    ``{"integrand": str, "domain": {"kind": ..., "a": ..., "b": ...},
    "singularities": [{"re": ..., "im": ...}], "reference": float}``
    """
    try:
        src = data["integrand"]
        dom = data["domain"]
        kind = _DOMAINS[dom["kind"]]
    except KeyError as exc:
        raise ConfigurationError(f"problem file is missing or has invalid field {exc}") from None
    if kind is OuterKind.FINITE_TANH:
        outer = OuterMap.finite_tanh(dom.get("a", -1.0), dom.get("b", 1.0))
    else:
        outer = {OuterKind.INFINITE_SINH: OuterMap.infinite_sinh,
                 OuterKind.SEMI_INF_LOG: OuterMap.semi_inf_log,
                 OuterKind.SEMI_INF_EXP: OuterMap.semi_inf_exp}[kind]()
    sing = tuple(complex(s["re"], abs(s["im"])) for s in data.get("singularities", []))
    return ProblemSpec(name, Expression(src), outer, sing, data.get("reference"), src)


def load_problem(path: str) -> ProblemSpec:
    with open(path) as fh:
        return problem_from_dict(json.load(fh), path)
