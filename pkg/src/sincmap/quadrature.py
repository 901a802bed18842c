"""Trapezoidal rule under a variable transformation.

The step size is chosen from the decay parameters of the transformed
integrand using the classical optimal-step formulas for single and double
exponential decay, for both quadrature and Sinc approximation.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ConfigurationError, DegenerateStepError, EvaluationError
from .transforms import ConformalTransform, NodeSet


@dataclass(frozen=True)
class DecayParams:
    """Decay description of a transformed integrand.

    Attributes:
        rho_or_gamma: ``rho >= 1`` for single exponential decay
            ``exp(-beta |t|^rho)``, ``gamma > 0`` for double exponential decay
            ``exp(-beta2 e^(gamma |t|))``.
        beta: ``beta`` or ``beta2``.
        d: half-width of the strip of analyticity.
        double_exponential: which of the two decay families applies.
    """

    rho_or_gamma: float
    beta: float
    d: float
    double_exponential: bool = True

    def __post_init__(self):
        if not (self.rho_or_gamma > 0 and self.beta > 0 and self.d > 0):
            raise ValueError("decay parameters must be strictly positive")
        if self.double_exponential:
            if self.d * self.rho_or_gamma > math.pi / 2 * (1 + 1e-12):
                raise ValueError(f"d*gamma = {self.d * self.rho_or_gamma:.6g} exceeds pi/2")
        elif self.rho_or_gamma < 1:
            raise ValueError("rho must be at least 1")


@dataclass(frozen=True)
class RuleConfig:
    """``N = 2n + 1`` nodes spaced ``step`` apart."""

    n: int
    step: float

    def __post_init__(self):
        if self.n < 1 or not self.step > 0:
            raise ValueError(f"invalid rule configuration n={self.n}, step={self.step}")

    @property
    def evaluations(self) -> int:
        return 2 * self.n + 1

    @classmethod
    def auto(cls, params: DecayParams, n: int, for_sinc: bool = False) -> "RuleConfig":
        return cls(n, optimal_step(params, n, for_sinc))


def optimal_step(params: DecayParams, n: int, for_sinc: bool = False) -> float:
    """Optimal mesh size for ``2n + 1`` points.

    Raises:
        DegenerateStepError: if the double exponential logarithm argument is
            at most one, i.e. ``n`` is too small for the given ``beta2``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    d, beta = params.d, params.beta
    if not params.double_exponential:
        rho = params.rho_or_gamma
        width = (math.pi * d) if for_sinc else (2 * math.pi * d)
        return width ** (1 / (rho + 1)) * (beta * n) ** (-rho / (rho + 1))
    gamma = params.rho_or_gamma
    arg = (math.pi if for_sinc else 2 * math.pi) * d * gamma * n / beta
    if arg <= 1:
        raise DegenerateStepError(f"log argument {arg:.4g} <= 1; increase n (n={n}, beta2={beta:.4g})")
    return math.log(arg) / (gamma * n)


def evaluate_integrand(f: Callable, nodes: NodeSet) -> np.ndarray:
    """Integrand values at the nodes.

    Integrands flagged with ``uses_gaps`` receive the accurate endpoint
    distances ``x - a`` and ``b - x`` as extra arguments.
    """
    with np.errstate(all="ignore"):
        if getattr(f, "uses_gaps", False):
            vals = f(nodes.x, nodes.left, nodes.right)
        else:
            vals = f(nodes.x)
    return np.broadcast_to(np.asarray(vals, dtype=float), nodes.x.shape)


def node_products(f: Callable, nodes: NodeSet) -> np.ndarray:
    """``f(phi(kh)) phi'(kh)`` with the 0 * inf conventions applied.

    A node that rounds onto an endpoint of the interval, or where either
    factor is exactly zero, contributes zero.  Any other non-finite product
    is an error.
    """
    fx = evaluate_integrand(f, nodes)
    w = nodes.weight
    at_end = (nodes.left == 0) | (nodes.right == 0) | ~np.isfinite(nodes.x)
    with np.errstate(all="ignore"):
        prod = fx * w
    zero = at_end | (fx == 0) | ((w == 0) & np.isfinite(fx))
    prod = np.where(zero, 0.0, prod)
    bad = ~np.isfinite(prod)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise EvaluationError(
            f"non-finite integrand value at node k={int(nodes.k[i])} "
            f"(t={nodes.t[i]:.6g}, x={nodes.x[i]:.6g}, f={fx[i]!r}, phi'={w[i]!r})",
            index=int(nodes.k[i]), t=float(nodes.t[i]), x=float(nodes.x[i]))
    return prod


def trapezoid(f: Callable, T: ConformalTransform, cfg: RuleConfig, workers: int = 1) -> float:
    """``step * sum_{k=-n}^{n} f(phi(k step)) phi'(k step)``.

    The sum is compensated and taken in ascending ``k`` so the result does
    not depend on ``workers``.
    """
    nodes = T.nodes(cfg.n, cfg.step)
    if workers <= 1:
        prod = node_products(f, nodes)
    else:
        chunks = np.array_split(np.arange(nodes.k.size), workers)

        def part(idx):
            sub = NodeSet(nodes.k[idx], nodes.t[idx], nodes.x[idx], nodes.weight[idx],
                          nodes.left[idx], nodes.right[idx])
            return node_products(f, sub)

        with ThreadPoolExecutor(max_workers=workers) as pool:
            prod = np.concatenate(list(pool.map(part, chunks)))
    return cfg.step * math.fsum(prod.tolist())


@dataclass(frozen=True)
class StudyRow:
    transform: str
    n: int
    evaluations: int
    value: float
    rel_error: float


def convergence_study(f: Callable, reference: float | None,
                      transforms: Sequence[tuple[ConformalTransform, DecayParams]],
                      n_values: Iterable[int], workers: int = 1) -> list[StudyRow]:
    """Relative error of the trapezoidal rule for each transform and ``n``.

    Raises:
        ConfigurationError: if no reference value is available.
    """
    if reference is None:
        raise ConfigurationError("convergence study needs a reference value")
    rows = []
    n_values = list(n_values)
    for T, params in transforms:
        for n in n_values:
            cfg = RuleConfig.auto(params, n)
            value = trapezoid(f, T, cfg, workers)
            err = abs(value - reference) / abs(reference)
            rows.append(StudyRow(T.label, n, cfg.evaluations, value, err))
    return rows


def rows_to_csv(rows: Iterable[StudyRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["transform", "n", "evaluations", "value", "rel_error"])
    for r in rows:
        w.writerow([r.transform, r.n, r.evaluations, repr(r.value), repr(r.rel_error)])
    return buf.getvalue()
