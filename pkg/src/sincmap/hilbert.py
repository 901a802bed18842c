"""Sinc approximation of the Hilbert transform and forced Benjamin-Ono waves.

The Hilbert transform is taken with the sign convention

    H y(x) = (1/pi) PV int y(s) / (s - x) ds,

which is the negative of the other common convention.  Traveling waves of
the forced Benjamin-Ono equation satisfy ``-c y + y^2/2 + H y' = f`` and are
computed by Sinc collocation with Newton's method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, NonConvergenceError
from .optimizer import optimize_map
from .quadrature import DecayParams, optimal_step
from .sinc import SincExpansion
from .transforms import (ConformalTransform, OuterMap, plain_de, single_exponential)

HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class LineTransform:
    """The identity map ``phi(t) = t`` on the real line.

    It has the interface of :class:`ConformalTransform` that the Sinc
    routines use, and suits band-limited functions.
    """

    label: str = "line"

    @property
    def interval(self) -> tuple[float, float]:
        return -math.inf, math.inf

    def phi(self, t):
        return np.asarray(t, dtype=float)

    def dphi(self, t):
        return np.ones(np.shape(t))

    def inverse(self, x: float) -> float:
        return float(x)


def sinc_derivative_weights(n: int, step: float) -> np.ndarray:
    """``W[l, j] = S'(j, step)(l step)`` for ``l, j = -n..n``.

    Off the diagonal this is ``(-1)^(l-j) / (step (l-j))``; the diagonal is 0.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    k = np.arange(-n, n + 1)
    d = k[:, None] - k[None, :]
    with np.errstate(divide="ignore"):
        W = np.where(d == 0, 0.0, np.where(d % 2 == 0, 1.0, -1.0) / (step * np.where(d == 0, 1, d)))
    return W


def _kernel(T, n: int, step: float, x: float) -> np.ndarray:
    """``[cos(pi(phi^{-1}(x)/step - j)) - 1] / (x - x_j)`` with its limits at nodes."""
    j = np.arange(-n, n + 1)
    xj = T.phi(j * step)
    hit = np.flatnonzero(xj == x)
    if hit.size:
        # at a node the cosine is +-1 exactly and the self term tends to 0
        k = j[hit[0]]
        d = k - j
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(d % 2 == 0, 0.0, -2.0) / (x - xj)
        out[hit[0]] = 0.0
        return out
    u = T.inverse(x) / step
    return (np.cos(np.pi * (u - j)) - 1.0) / (x - xj)


def discrete_hilbert(T, step: float, samples: Sequence[float], x: float) -> float:
    """Sinc approximation of ``H y(x)`` from ``y_j = y(phi(j step))``."""
    y = np.asarray(samples, dtype=float)
    n = y.size // 2
    j = np.arange(-n, n + 1)
    w = y * T.dphi(j * step)
    return step / math.pi * float(np.dot(w, _kernel(T, n, step, float(x))))


def discrete_hilbert_of_derivative(e: SincExpansion, x: float) -> float:
    """Sinc approximation of ``H y'(x)`` for ``y`` given by a Sinc expansion.

    ``y'(phi(l h)) phi'(l h)`` is the ``t``-derivative of ``y(phi(t))`` at the
    node, which the derivative weights give directly, so no ``phi'`` appears.
    """
    W = sinc_derivative_weights(e.n, e.step)
    return e.step / math.pi * float(np.dot(W @ e.coefficients, _kernel(e.transform, e.n, e.step, float(x))))


def hilbert_derivative_matrix(T, n: int, step: float) -> np.ndarray:
    """Matrix ``M`` with ``(M y)_k = H y'(x_k)`` at the Sinc nodes."""
    k = np.arange(-n, n + 1)
    xk = T.phi(k * step)
    d = k[:, None] - k[None, :]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        K = np.where(d % 2 == 0, 0.0, -2.0 / (xk[:, None] - xk[None, :]))
    # nodes that overflowed to infinity sit at the point at infinity
    K[~np.isfinite(K)] = 0.0
    return step / math.pi * (K @ sinc_derivative_weights(n, step))


def _inv_sq(w, e):
    """``1 / (w^2 + e^2)``, zero where ``w^2`` overflows."""
    with np.errstate(over="ignore"):
        return 1.0 / (w * w + e * e)


@dataclass(frozen=True)
class LorentzianSumSolution:
    """``y(x) = sum_i eps_i^2 / ((x - delta_i)^2 + eps_i^2)``."""

    terms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.terms:
            raise ValueError("need at least one Lorentzian")
        for _, eps in self.terms:
            if not eps > 0:
                raise ValueError(f"widths must be positive, got {eps}")

    @property
    def singularities(self) -> tuple[complex, ...]:
        return tuple(complex(d, e) for d, e in self.terms)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = 0.0
        for d, e in self.terms:
            q = _inv_sq(x - d, e)
            out = out + e * e * q
        return out

    def hilbert(self, x):
        """``H y`` in closed form."""
        x = np.asarray(x, dtype=float)
        out = 0.0
        for d, e in self.terms:
            w = x - d
            q = _inv_sq(w, e)
            out = out - np.where(q == 0, 0.0, e * w * q)
        return out

    def hilbert_derivative(self, x):
        """``H y'`` in closed form."""
        x = np.asarray(x, dtype=float)
        out = 0.0
        for d, e in self.terms:
            w = x - d
            q = _inv_sq(w, e)
            # (w^2 - e^2) q = 1 - 2 e^2 q stays finite for huge w
            out = out + e * q * (1.0 - 2.0 * e * e * q)
        return out


def forcing_for(sol: LorentzianSumSolution, c: float) -> Callable:
    """Forcing ``f = -c y + y^2/2 + H y'`` that makes ``sol`` an exact wave."""

    def f(x):
        y = sol(x)
        return -c * y + 0.5 * y * y + sol.hilbert_derivative(x)

    return f


@dataclass(frozen=True)
class BOProblem:
    """Collocation problem for ``-c y + y^2/2 + H y' = f``.

    Attributes:
        c: wave speed, nonzero.
        forcing: vectorized ``f``.
        transform: map from the strip variable to the real line.
        n: nodes ``-n..n``.
        step: mesh size.
    """

    c: float
    forcing: Callable
    transform: ConformalTransform
    n: int
    step: float

    def __post_init__(self):
        if not self.step > 0 or self.n < 1:
            raise ValueError("need step > 0 and n >= 1")

    @property
    def nodes(self) -> np.ndarray:
        return self.transform.phi(np.arange(-self.n, self.n + 1) * self.step)


def bo_residual(M: np.ndarray, c: float, fk: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``F_k = -c y_k + y_k^2/2 + (M y)_k - f_k``."""
    return -c * y + 0.5 * y * y + M @ y - fk


def bo_jacobian(M: np.ndarray, c: float, y: np.ndarray) -> np.ndarray:
    """``dF/dy = M + diag(y - c)``."""
    return M + np.diag(y - c)


@dataclass
class BOSolution:
    expansion: SincExpansion
    iterations: int
    residual: float


def solve_benjamin_ono(p: BOProblem, y0: Sequence[float] | None = None,
                       tol: float | None = None, max_iter: int = 100) -> BOSolution:
    """Newton iteration for the node values ``y_k``.

    The step is halved up to 10 times while the residual grows.  The
    default start is ``-f(x_k)/c`` and the default tolerance is
    ``1e-12 (1 + max|f|)``.

    Raises:
        NonConvergenceError: if the residual grows for 5 consecutive damped
            steps or ``max_iter`` is exhausted.
    """
    if p.c == 0:
        raise ConfigurationError("wave speed must be nonzero")
    xk = p.nodes
    fk = np.asarray(p.forcing(xk), dtype=float)
    if not np.all(np.isfinite(fk)):
        raise ConfigurationError("forcing is not finite at every node")
    M = hilbert_derivative_matrix(p.transform, p.n, p.step)
    y = -fk / p.c if y0 is None else np.array(y0, dtype=float)
    if y.shape != xk.shape:
        raise ValueError(f"initial guess needs {xk.size} values, got {y.size}")
    if tol is None:
        tol = 1e-12 * (1.0 + float(np.max(np.abs(fk))))

    def F(v):
        return bo_residual(M, p.c, fk, v)

    r = F(y)
    norm = float(np.max(np.abs(r)))
    worse = 0
    for it in range(max_iter + 1):
        if norm <= tol:
            return BOSolution(SincExpansion(y, p.step, p.transform), it, norm)
        J = bo_jacobian(M, p.c, y)
        dy = np.linalg.solve(J, -r)
        # backtrack on the squared 2-norm, which descends along the Newton step
        g = float(r @ r)
        lam = 1.0
        for _ in range(11):
            y_try = y + lam * dy
            r_try = F(y_try)
            if float(r_try @ r_try) <= (1.0 - 1e-4 * lam) * g:
                break
            lam *= 0.5
        n_try = float(np.max(np.abs(r_try)))
        worse = worse + 1 if n_try >= norm else 0
        if worse >= 5:
            raise NonConvergenceError("Newton iteration diverged", last_iterate=y_try)
        y, r, norm = y_try, r_try, n_try
    raise NonConvergenceError(f"no convergence in {max_iter} Newton steps (residual {norm:.3e})",
                              last_iterate=y)


def bo_transform(label: str, singularities: Sequence[complex]) -> tuple[ConformalTransform, DecayParams]:
    """Transform and Sinc decay parameters for the wave problem.

    The decay constants follow the tabulated values for this problem, where
    ``beta2`` is half the sinh coefficient of the inner map.
    """
    outer = OuterMap.infinite_sinh()
    if label == "se":
        return single_exponential(outer), DecayParams(1.0, 0.5, _se_strip(singularities), False)
    if label == "de":
        return plain_de(outer), DecayParams(1.0, math.pi / 4, _de_strip(singularities))
    if label == "opt":
        sol = optimize_map(singularities, outer)
        return ConformalTransform(outer, sol.map, "opt"), DecayParams(1.0, 0.5 * sol.map.u0, HALF_PI)
    raise ConfigurationError(f"unknown transform {label!r}")


def _se_strip(singularities) -> float:
    return min(abs(np.arcsinh(complex(s)).imag) for s in singularities)


def _de_strip(singularities) -> float:
    return min(abs(np.arcsinh(np.arcsinh(complex(s)) / HALF_PI).imag) for s in singularities)


@dataclass
class BOReport:
    transform: str
    n: int
    sup_rel_error: float
    newton_iterations: int
    grid: np.ndarray
    exact: np.ndarray
    computed: np.ndarray

    def summary(self) -> dict:
        return {"n": self.n, "transform": self.transform,
                "sup_rel_error": self.sup_rel_error, "newton_iterations": self.newton_iterations}


def run_lorentzian_study(sol: LorentzianSumSolution, c: float, label: str, n: int,
                         points: int = 101, lo: float = -5.0, hi: float = 5.0) -> BOReport:
    """Solve for the wave whose exact form is ``sol`` and measure the error.

    The error is ``max |(y - y_n)/y|`` over equispaced points of ``[lo, hi]``.
    """
    T, params = bo_transform(label, sol.singularities)
    step = optimal_step(params, n, for_sinc=True)
    res = solve_benjamin_ono(BOProblem(c, forcing_for(sol, c), T, n, step))
    grid = np.linspace(lo, hi, points)
    exact = sol(grid)
    computed = res.expansion(grid)
    err = float(np.max(np.abs((exact - computed) / exact)))
    return BOReport(label, n, err, res.iterations, grid, exact, computed)
