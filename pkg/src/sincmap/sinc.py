"""Sinc interpolation, Sinc-Padé approximants and adaptive integration.

The adaptive integrator locates the singularities of an integrand from the
poles of rational interpolants fit at the central Sinc points, and feeds
them to the map optimizer.  Only the samples already computed by the
trapezoidal rule are used.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (ConfigurationError, DegenerateStepError, IllConditionedError,
                     NonConvergenceError, SincMapError)
from .optimizer import beta2_of, optimize_map
from .quadrature import DecayParams, RuleConfig, evaluate_integrand, node_products
from .transforms import ConformalTransform, OuterMap, plain_de

log = logging.getLogger(__name__)

HALF_PI = 0.5 * math.pi


def sinc_basis(j: int, step: float, x):
    """``S(j, step)(x) = sin(pi (x/step - j)) / (pi (x/step - j))``.

    Exactly 1 at ``x = j step`` and exactly 0 at the other Sinc points.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    u = np.asarray(x, dtype=float) / step - j
    r = np.rint(u)
    on_grid = u == r
    safe = np.where(on_grid, 1.0, u)
    # sin(pi u) = (-1)^r sin(pi (u - r)) avoids the loss in sin near multiples of pi
    sign = np.where(np.remainder(r, 2) == 0, 1.0, -1.0)
    val = sign * np.sin(np.pi * (safe - r)) / (np.pi * safe)
    out = np.where(on_grid, np.where(r == 0, 1.0, 0.0), val)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class SincExpansion:
    """``sum_j y_j S(j, step)(phi^{-1}(x))`` for ``j = -n..n``.

    Attributes:
        coefficients: samples ``y_{-n}..y_n``.
        step: mesh size in ``t``.
        transform: the map ``phi``.
    """

    coefficients: np.ndarray
    step: float
    transform: ConformalTransform

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        if c.ndim != 1 or c.size % 2 != 1:
            raise ValueError("need an odd number 2n+1 of coefficients")
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def from_function(cls, f: Callable, T: ConformalTransform, n: int, step: float) -> "SincExpansion":
        nodes = T.nodes(n, step)
        return cls(evaluate_integrand(f, nodes), step, T)

    @property
    def n(self) -> int:
        return self.coefficients.size // 2

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.n, self.n + 1)

    def nodes(self) -> np.ndarray:
        return self.transform.phi(self.indices * self.step)

    def eval_t(self, t):
        """Evaluate in the strip variable ``t``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        S = sinc_basis(self.indices[None, :], self.step, t[:, None])
        return S @ self.coefficients

    def __call__(self, x):
        """Evaluate at points ``x`` of the target interval.

        A point that coincides with a node returns that node's coefficient
        exactly.
        """
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        grid = self.nodes()
        out = np.empty(xs.shape)
        for i, v in enumerate(xs):
            k = np.searchsorted(grid, v)
            if k < grid.size and grid[k] == v:
                out[i] = self.coefficients[k]
            else:
                out[i] = self.eval_t(self.transform.inverse(v))[0]
        return out if np.ndim(x) else float(out[0])


@dataclass(frozen=True)
class SincPadeApproximant:
    """``(sum_i p_i x^i) / (1 + sum_j q_j x^j)`` fit at central Sinc points.

    Attributes:
        p: numerator coefficients ``p_0..p_r``.
        q: denominator coefficients ``q_1..q_s``.
        step: mesh size of the sampling.
        residual: max interpolation residual at the fitting nodes.
        condition: condition estimate of the column-scaled system.
    """

    p: np.ndarray
    q: np.ndarray
    step: float = float("nan")
    residual: float = 0.0
    condition: float = 1.0

    def __call__(self, x):
        x = np.asarray(x)
        num = np.polynomial.polynomial.polyval(x, self.p)
        den = 1.0 + x * np.polynomial.polynomial.polyval(x, self.q) if len(self.q) else 1.0
        return num / den

    @property
    def denominator(self) -> np.ndarray:
        """Denominator coefficients with the leading constant ``1``."""
        return np.concatenate([[1.0], self.q])


def central_indices(r: int, s: int) -> np.ndarray:
    """``k = -floor((r+s)/2) .. ceil((r+s)/2)``."""
    return np.arange(-((r + s) // 2), -(-(r + s) // 2) + 1)


def fit_sinc_pade(xk: Sequence[float], fk: Sequence[float], r: int, s: int,
                  step: float = float("nan"), max_condition: float = 1e22) -> SincPadeApproximant:
    """Solve ``sum p_i x_k^i - f_k sum q_j x_k^j = f_k`` in the least squares sense.

    Columns are scaled to unit norm before an SVD-based solve, which leaves
    the rational function unchanged but removes the scale disparity of the
    monomial columns.

    Raises:
        IllConditionedError: if the scaled system is numerically rank
            deficient beyond ``max_condition``.
    """
    x = np.asarray(xk, dtype=float)
    f = np.asarray(fk, dtype=float)
    if r < 0 or s < 0:
        raise ValueError("degrees must be non-negative")
    if x.size < r + s + 1:
        raise ValueError(f"need at least r+s+1 = {r + s + 1} samples, got {x.size}")
    A = np.hstack([x[:, None] ** np.arange(r + 1),
                   -f[:, None] * x[:, None] ** np.arange(1, s + 1)])
    scale = np.linalg.norm(A, axis=0)
    scale[scale == 0] = 1.0
    sol, _, rank, sv = np.linalg.lstsq(A / scale, f, rcond=None)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    if not cond < max_condition:
        raise IllConditionedError(f"Sinc-Padé system has condition {cond:.3e}", condition=cond)
    coef = sol / scale
    res = float(np.max(np.abs(A @ coef - f))) if f.size else 0.0
    return SincPadeApproximant(coef[:r + 1], coef[r + 1:], step, res, cond)


def pade_degrees(n: int) -> tuple[int, int]:
    """``(log2 n - 2, log2 n + 2)`` for ``n`` a power of two, ``n >= 4``."""
    k = int(round(math.log2(n)))
    if n < 4 or 2 ** k != n:
        raise ConfigurationError(f"n must be a power of two >= 4, got {n}")
    return k - 2, k + 2


def fit_from_samples(expansion: SincExpansion, r: int, s: int) -> SincPadeApproximant:
    """Fit at the ``r + s + 1`` central nodes of an expansion."""
    if r + s > 2 * expansion.n:
        raise ConfigurationError(f"r+s = {r + s} exceeds 2n = {2 * expansion.n}")
    k = central_indices(r, s)
    idx = k + expansion.n
    xk = expansion.transform.phi(k * expansion.step)
    return fit_sinc_pade(xk, expansion.coefficients[idx], r, s, expansion.step)


@dataclass(frozen=True)
class PoleSet:
    poles: tuple[complex, ...]
    shortfall: bool

    def upper(self) -> tuple[complex, ...]:
        return tuple(z for z in self.poles if z.imag > 0)


def pade_poles(a: SincPadeApproximant, count: int) -> PoleSet:
    """The ``count`` conjugate pairs of denominator roots nearest the real axis.

    Returns both members of each pair, upper member first.  ``shortfall``
    is set when fewer than ``count`` pairs are available.
    """
    q = np.trim_zeros(a.denominator, "b")
    if q.size < 2:
        if len(a.q) < 1:
            raise ConfigurationError("denominator degree s must be at least 1")
        return PoleSet((), count > 0)
    roots = np.polynomial.polynomial.polyroots(q)
    upper = sorted((complex(z) for z in roots if z.imag > 1e-6), key=lambda z: abs(z.imag))
    chosen = upper[:count]
    out = []
    for z in chosen:
        out.extend([z, z.conjugate()])
    return PoleSet(tuple(out), len(chosen) < count)


@dataclass
class AdaptiveStep:
    """One iteration of the adaptive integrator.

    ``poles`` are the upper-half Sinc-Padé poles of this iteration's own
    samples (empty when no fit was possible); phase 2 builds the next map
    from them.
    """

    phase: int
    n: int
    value: float
    estimate: float
    coefficients: tuple[float, ...]
    poles: tuple[complex, ...] = ()
    fallback: bool = False
    note: str = ""

    def to_json(self) -> dict:
        return {
            "phase": self.phase,
            "n": self.n,
            "value": self.value,
            "error_estimate": self.estimate,
            "map": list(self.coefficients),
            "poles": [[z.real, z.imag] for z in self.poles],
            "fallback": self.fallback,
            "note": self.note,
        }


@dataclass
class AdaptiveResult:
    value: float
    estimate: float
    transform: ConformalTransform
    steps: list[AdaptiveStep] = field(default_factory=list)

    def poles_at(self, n: int) -> tuple[complex, ...]:
        for s in self.steps:
            if s.n == n:
                return s.poles
        return ()

    def to_json(self) -> dict:
        return {"value": self.value, "error_estimate": self.estimate,
                "iterations": [s.to_json() for s in self.steps]}


def _rel_change(new: float, old: float) -> float:
    return abs(new - old) / max(abs(new), np.finfo(float).tiny)


def _integrate(f: Callable, T: ConformalTransform, params: DecayParams, n: int):
    cfg = RuleConfig.auto(params, n)
    nodes = T.nodes(cfg.n, cfg.step)
    prod = node_products(f, nodes)
    value = cfg.step * math.fsum(prod.tolist())
    return value, SincExpansion(evaluate_integrand(f, nodes), cfg.step, T)


def _poles(expansion: SincExpansion, max_pairs: int) -> tuple[tuple[complex, ...], str]:
    try:
        r, s = pade_degrees(expansion.n)
        return pade_poles(fit_from_samples(expansion, r, s), max_pairs).upper(), ""
    except (SincMapError, np.linalg.LinAlgError) as exc:
        return (), str(exc)


def adaptive_integrate(f: Callable, outer: OuterMap, eps: float = 1e-12,
                       max_n: int = 2 ** 12, max_pairs: int = 4,
                       xbar: float = 20.0, phase1_tol: float = 1e-3,
                       phase1_strip: float = HALF_PI) -> AdaptiveResult:
    """Integrate ``f`` over the interval of ``outer`` with singularities unknown.

    Phase 1 doubles ``n`` from 1 under the plain double exponential map
    until successive values agree to a relative ``phase1_tol``.  Phase 2
    then fits a Sinc-Padé approximant to the latest samples, turns its
    poles into an optimized map, doubles ``n`` and integrates again, until
    the successive relative change drops below ``eps``.  If pole extraction
    or the map optimization fails, the previous map is kept.

    Args:
        f: vectorized integrand.
        outer: outer map of the integration interval.
        eps: target relative error, above ``1e-14``.
        max_n: largest ``n`` tried before giving up.
        max_pairs: cap on the number of conjugate pole pairs given to the
            optimizer.
        xbar: bound on ``|x_1 + x_n|`` passed to the optimizer.
        phase1_tol: relative change that ends phase 1.
        phase1_strip: strip half-width assumed by the phase 1 step size.
            Nothing is known about the singularities at that point, so the
            default is the full ``pi/2`` of the plain map.

    Raises:
        NonConvergenceError: if ``max_n`` is reached first; ``last_iterate``
            holds the partial :class:`AdaptiveResult`.
    """
    if not eps > 1e-14:
        raise ConfigurationError("eps must exceed 1e-14 in double precision")
    T = plain_de(outer)
    params = DecayParams(1.0, beta2_of(T.inner, outer), phase1_strip)
    result = AdaptiveResult(math.nan, math.inf, T)

    def record(phase, n, value, est, expansion, fallback=False, note=""):
        poles, why = _poles(expansion, max_pairs) if n >= 4 else ((), "")
        result.steps.append(AdaptiveStep(phase, n, value, est, T.inner.coefficients, poles,
                                         fallback, note or why))
        result.value, result.estimate, result.transform = value, est, T

    # phase 1: plain DE until the approximation is roughly right
    n = 1
    prev, expansion = _integrate(f, T, params, n)
    record(1, n, prev, math.inf, expansion)
    est = math.inf
    while est >= phase1_tol:
        if n >= max_n:
            raise NonConvergenceError(f"phase 1 did not reach {phase1_tol:g} by n={max_n}",
                                      last_iterate=result)
        n *= 2
        try:
            value, expansion = _integrate(f, T, params, n)
        except DegenerateStepError:
            continue
        est = _rel_change(value, prev)
        prev = value
        record(1, n, value, est, expansion)

    # phase 2: rebuild the map from the poles of the latest samples
    while est >= eps:
        if n >= max_n:
            raise NonConvergenceError(f"no convergence to {eps:g} by n={max_n}",
                                      last_iterate=result)
        fallback, note = False, ""
        T_new, params_new = T, params
        poles = result.steps[-1].poles
        try:
            if not poles:
                raise SincMapError(result.steps[-1].note or "no off-axis poles found")
            sol = optimize_map(poles, outer, xbar)
            T_new = ConformalTransform(outer, sol.map, "adaptive")
            params_new = DecayParams(1.0, beta2_of(sol.map, outer), HALF_PI)
        except (SincMapError, ValueError, np.linalg.LinAlgError) as exc:
            log.info("adaptive step at n=%d keeps the previous map: %s", n, exc)
            fallback, note = True, str(exc)
        n *= 2
        try:
            value, expansion = _integrate(f, T_new, params_new, n)
        except SincMapError as exc:
            if T_new is T:
                raise
            fallback, note = True, str(exc)
            T_new, params_new = T, params
            value, expansion = _integrate(f, T, params, n)
        T, params = T_new, params_new
        est = _rel_change(value, prev)
        prev = value
        record(2, n, value, est, expansion, fallback, note)
    return result
