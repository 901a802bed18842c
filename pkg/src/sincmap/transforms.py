"""Outer maps, inner sinh-polynomial maps and their compositions.

Every variable transformation used in the package is written as
``phi(t) = psi(h(t))`` where ``psi`` is one of four elementary outer maps
(tanh, sinh, log(e^z + 1), exp) and ``h`` is an inner map that grows single
exponentially.  The plain double exponential transformation uses
``h(t) = (pi/2) sinh(t)``; the optimized transformations add a polynomial
correction to that.

All evaluation routines accept complex scalars or numpy arrays.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DomainError

__all__ = [
    "OuterKind",
    "OuterMap",
    "SinhPolyMap",
    "LinearMap",
    "LinearMinusExpMap",
    "ConformalTransform",
    "NodeSet",
    "plain_de",
    "single_exponential",
    "invert_monotone",
]


class OuterKind(enum.Enum):
    FINITE_TANH = "finite"
    INFINITE_SINH = "infinite"
    SEMI_INF_LOG = "semi_log"
    SEMI_INF_EXP = "semi_exp"


def _sech2(y):
    # 4 e^{-2|y|} / (1 + e^{-2|y|})^2 never overflows
    e = np.exp(-2.0 * np.abs(y))
    return 4.0 * e / (1.0 + e) ** 2


@dataclass(frozen=True)
class OuterMap:
    """One of the four canonical outer maps ``psi``.

    For ``FINITE_TANH`` the map includes the affine rescaling onto ``(a, b)``:
    ``psi(z) = (b - a)/2 * tanh(z) + (b + a)/2``.  The endpoints are ignored
    for the other kinds, whose target intervals are fixed.
    """

    kind: OuterKind
    a: float = -1.0
    b: float = 1.0

    def __post_init__(self):
        if self.kind is OuterKind.FINITE_TANH and not self.a < self.b:
            raise ValueError(f"finite interval needs a < b, got ({self.a}, {self.b})")

    @classmethod
    def finite_tanh(cls, a: float = -1.0, b: float = 1.0) -> "OuterMap":
        return cls(OuterKind.FINITE_TANH, float(a), float(b))

    @classmethod
    def infinite_sinh(cls) -> "OuterMap":
        return cls(OuterKind.INFINITE_SINH, -math.inf, math.inf)

    @classmethod
    def semi_inf_log(cls) -> "OuterMap":
        return cls(OuterKind.SEMI_INF_LOG, 0.0, math.inf)

    @classmethod
    def semi_inf_exp(cls) -> "OuterMap":
        return cls(OuterKind.SEMI_INF_EXP, 0.0, math.inf)

    @property
    def interval(self) -> tuple[float, float]:
        return self.a, self.b

    @property
    def _half(self):
        return 0.5 * (self.b - self.a)

    @property
    def _mid(self):
        return 0.5 * (self.b + self.a)

    def forward(self, z):
        """Evaluate ``psi(z)``."""
        z = np.asarray(z)
        with np.errstate(over="ignore", invalid="ignore"):
            if self.kind is OuterKind.FINITE_TANH:
                return self._half * np.tanh(z) + self._mid
            if self.kind is OuterKind.INFINITE_SINH:
                return np.sinh(z)
            if self.kind is OuterKind.SEMI_INF_LOG:
                if np.iscomplexobj(z):
                    # log(e^z + 1) = z + log(1 + e^-z) keeps e^z from overflowing
                    big = z.real > 0
                    safe_neg = np.where(big, 0.0, z)
                    safe_pos = np.where(big, z, 0.0)
                    return np.where(big, safe_pos + np.log1p(np.exp(-safe_pos)),
                                    np.log1p(np.exp(safe_neg)))
                return np.logaddexp(0.0, z)
            return np.exp(z)

    def deriv(self, z):
        """Evaluate ``psi'(z)``."""
        z = np.asarray(z)
        with np.errstate(over="ignore", invalid="ignore"):
            if self.kind is OuterKind.FINITE_TANH:
                if np.iscomplexobj(z):
                    return self._half / np.cosh(z) ** 2
                return self._half * _sech2(z)
            if self.kind is OuterKind.INFINITE_SINH:
                return np.cosh(z)
            if self.kind is OuterKind.SEMI_INF_LOG:
                if np.iscomplexobj(z):
                    return 1.0 / (1.0 + np.exp(-z))
                return 0.5 * (1.0 + np.tanh(0.5 * z))
            return np.exp(z)

    def inverse(self, w):
        """Principal-branch ``psi^{-1}(w)``.

        Raises:
            DomainError: if ``w`` lies on a branch cut of the inverse.
        """
        w = np.asarray(w)
        self._check_cut(w)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            if self.kind is OuterKind.FINITE_TANH:
                s = (w - self._mid) / self._half
                return np.arctanh(s)
            if self.kind is OuterKind.INFINITE_SINH:
                return np.arcsinh(w)
            if self.kind is OuterKind.SEMI_INF_LOG:
                if np.iscomplexobj(w):
                    return np.log(np.exp(w) - 1.0)
                # log(e^w - 1) = w + log(1 - e^-w)
                return w + np.log(-np.expm1(-w))
            return np.log(w)

    def _check_cut(self, w):
        if np.iscomplexobj(w):
            on_axis = w.imag == 0
            re = w.real
        else:
            on_axis = np.ones(w.shape, dtype=bool)
            re = w
        if self.kind is OuterKind.FINITE_TANH:
            bad = on_axis & ((re <= self.a) | (re >= self.b))
        elif self.kind is OuterKind.INFINITE_SINH:
            bad = np.zeros(w.shape, dtype=bool)
            if np.iscomplexobj(w):
                bad = (w.real == 0) & (np.abs(w.imag) >= 1)
        else:
            bad = on_axis & (re <= 0)
        if np.any(bad):
            raise DomainError(f"{w!r} lies on a branch cut of the inverse {self.kind.value} map")

    def real_nodes(self, y):
        """Evaluate ``psi`` on real ``y`` with accurate endpoint gaps.

        Returns:
            ``(x, dpsi, left, right)`` where ``left = x - a`` and
            ``right = b - x``, each computed without cancellation.  Infinite
            gaps are returned as ``inf``.
        """
        y = np.asarray(y, dtype=float)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            if self.kind is OuterKind.FINITE_TANH:
                width = self.b - self.a
                left = width / (1.0 + np.exp(-2.0 * y))
                right = width / (1.0 + np.exp(2.0 * y))
                x = np.where(y < 0, self.a + left, self.b - right)
                return x, self._half * _sech2(y), left, right
            inf = np.full(y.shape, np.inf)
            if self.kind is OuterKind.INFINITE_SINH:
                return np.sinh(y), np.cosh(y), inf, inf
            if self.kind is OuterKind.SEMI_INF_LOG:
                x = np.logaddexp(0.0, y)
                return x, 0.5 * (1.0 + np.tanh(0.5 * y)), x, inf
            x = np.exp(y)
            return x, x, x, inf


def invert_monotone(func: Callable[[float], float], dfunc: Callable[[float], float],
                    target: float, t0: float = 0.0, tol: float = 1e-15,
                    max_iter: int = 200) -> float:
    """Solve ``func(t) = target`` for an increasing ``func``.

    Newton iteration from ``t0`` with a bisection safeguard on a bracket that
    is grown geometrically until it encloses the root.
    """
    g0 = func(t0) - target
    if g0 == 0:
        return t0
    lo, hi = t0, t0
    width = 1.0
    if g0 < 0:
        while func(hi) - target < 0:
            lo = hi
            hi = t0 + width
            width *= 2.0
            if width > 1e6:
                raise DomainError(f"cannot bracket inverse of {target!r}")
    else:
        while func(lo) - target > 0:
            hi = lo
            lo = t0 - width
            width *= 2.0
            if width > 1e6:
                raise DomainError(f"cannot bracket inverse of {target!r}")
    t = min(max(t0, lo), hi)
    scale = max(1.0, abs(target))
    for _ in range(max_iter):
        g = func(t) - target
        if abs(g) <= tol * scale:
            return t
        if g < 0:
            lo = t
        else:
            hi = t
        d = dfunc(t)
        step_ok = False
        if d > 0 and math.isfinite(d):
            t_new = t - g / d
            step_ok = lo < t_new < hi
        if not step_ok:
            t_new = 0.5 * (lo + hi)
        if t_new == t or hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(t)):
            return t_new
        t = t_new
    return t


@dataclass(frozen=True)
class SinhPolyMap:
    """Inner map ``h(t) = u0 sinh(t) + sum_j u_j t^(j-1)``.

    Attributes:
        u0: coefficient of the sinh term, strictly positive.
        u: polynomial coefficients ``u_1, ..., u_n`` (constant term first).
        abscissas: real parts ``x_k`` of the strip points ``x_k + i pi/2``
            that the optimizer pinned to the singularity pre-images.  Empty
            for maps that were not produced by the optimizer.
    """

    u0: float
    u: tuple[float, ...] = ()
    abscissas: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.u0 > 0:
            raise ValueError(f"u0 must be positive, got {self.u0}")
        object.__setattr__(self, "u", tuple(float(v) for v in self.u))
        object.__setattr__(self, "abscissas", tuple(float(v) for v in self.abscissas))

    @property
    def coefficients(self) -> tuple[float, ...]:
        """``(u0, u1, ..., un)``."""
        return (self.u0,) + self.u

    def __call__(self, t):
        t = np.asarray(t)
        with np.errstate(over="ignore"):
            out = self.u0 * np.sinh(t)
        if self.u:
            out = out + P.polyval(t, self.u)
        return out

    def deriv(self, t):
        t = np.asarray(t)
        with np.errstate(over="ignore"):
            out = self.u0 * np.cosh(t)
        if len(self.u) > 1:
            out = out + P.polyval(t, P.polyder(self.u))
        return out

    def inverse(self, y: float) -> float:
        return invert_monotone(lambda s: float(self(s)), lambda s: float(self.deriv(s)), float(y))


@dataclass(frozen=True)
class LinearMap:
    """Inner map ``h(t) = scale * t`` used by single exponential rules."""

    scale: float = 1.0

    def __call__(self, t):
        return self.scale * np.asarray(t)

    def deriv(self, t):
        t = np.asarray(t)
        return np.full(t.shape, self.scale, dtype=t.dtype if np.iscomplexobj(t) else float)

    def inverse(self, y: float) -> float:
        return float(y) / self.scale


@dataclass(frozen=True)
class LinearMinusExpMap:
    """Inner map ``h(t) = a t - b exp(-t)``.

    Composed with ``exp`` this is the literature double exponential rule for
    integrands that decay only exponentially at infinity.
    """

    a: float = 0.22
    b: float = 0.017

    def __call__(self, t):
        t = np.asarray(t)
        with np.errstate(over="ignore"):
            return self.a * t - self.b * np.exp(-t)

    def deriv(self, t):
        t = np.asarray(t)
        with np.errstate(over="ignore"):
            return self.a + self.b * np.exp(-t)

    def inverse(self, y: float) -> float:
        return invert_monotone(lambda s: float(self(s)), lambda s: float(self.deriv(s)), float(y))


@dataclass(frozen=True)
class NodeSet:
    """Transformed trapezoidal nodes ``x_k = phi(k h)`` and weights ``phi'(k h)``."""

    k: np.ndarray
    t: np.ndarray
    x: np.ndarray
    weight: np.ndarray
    left: np.ndarray
    right: np.ndarray


@dataclass(frozen=True)
class ConformalTransform:
    """The composition ``phi = psi o h``.

    Attributes:
        outer: the outer map ``psi``.
        inner: the inner map ``h``; any object with ``__call__``, ``deriv``
            and ``inverse``.
        label: short name used in tables and CSV output.
    """

    outer: OuterMap
    inner: object
    label: str = field(default="", compare=False)

    @property
    def interval(self) -> tuple[float, float]:
        return self.outer.interval

    def phi(self, t):
        return self.outer.forward(self.inner(t))

    def dphi(self, t):
        return self.outer.deriv(self.inner(t)) * self.inner.deriv(t)

    def __call__(self, t):
        return self.phi(t)

    def nodes(self, n: int, step: float) -> NodeSet:
        """Nodes ``k = -n..n`` in ascending order."""
        k = np.arange(-n, n + 1)
        t = k * step
        x, dpsi, left, right = self.outer.real_nodes(self.inner(t))
        with np.errstate(over="ignore", invalid="ignore"):
            w = dpsi * self.inner.deriv(t)
        return NodeSet(k, t, x, w, left, right)

    def inverse(self, x: float, tol: float = 1e-14) -> float:
        """Return ``t`` with ``phi(t) = x`` for ``x`` inside the open interval.

        Raises:
            DomainError: if ``x`` is not strictly inside the target interval.
        """
        x = float(x)
        a, b = self.interval
        if not a < x < b:
            raise DomainError(f"{x} is outside the open interval ({a}, {b})")
        y = float(self.outer.inverse(x))
        t = self.inner.inverse(y)
        scale = max(1.0, abs(x))
        if abs(float(self.phi(t)) - x) > tol * scale:
            # polish directly on phi; only reached when psi^{-1} lost digits
            t = invert_monotone(lambda s: float(self.phi(s)), lambda s: float(self.dphi(s)),
                                x, t0=t, tol=tol)
        return t

    def inverse_array(self, xs: Sequence[float]) -> np.ndarray:
        return np.array([self.inverse(v) for v in np.ravel(xs)]).reshape(np.shape(xs))


def plain_de(outer: OuterMap, label: str = "de") -> ConformalTransform:
    """The standard double exponential rule ``psi((pi/2) sinh t)``."""
    return ConformalTransform(outer, SinhPolyMap(math.pi / 2), label)


def single_exponential(outer: OuterMap, label: str = "se") -> ConformalTransform:
    """Single exponential rules of the classical table.

    ``tanh(t/2)`` on finite intervals, ``psi(t)`` otherwise.
    """
    scale = 0.5 if outer.kind is OuterKind.FINITE_TANH else 1.0
    return ConformalTransform(outer, LinearMap(scale), label)
