"""Singularity pre-images and the sinh-polynomial map parameter program.

Given pre-images ``w_k = d_k + i e_k`` (sorted by real part) the program is

    maximize u0  subject to  h(x_k + i pi/2) = w_k,  k = 1..n,

over ``u0, u_1..u_n, x_1..x_n``, where ``h(t) = u0 sinh t + sum u_j t^(j-1)``.
With one more unknown than real equations the feasible set is a curve; the
solver walks along it with a reduced-space SQP iteration and is driven from
the exactly solvable collinear problem to the target by a homotopy in the
pre-image locations.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, MonotonicityError, OptimizationError
from .transforms import OuterKind, OuterMap, SinhPolyMap

log = logging.getLogger(__name__)

HALF_PI = 0.5 * math.pi
RESIDUAL_TOL = 1e-10
MAX_ITER = 200
MAX_STEPS = 256


@dataclass(frozen=True)
class SingularitySet:
    """Upper-half-plane representatives ``delta_k + i eps_k``; conjugates implied."""

    points: tuple[complex, ...]

    def __post_init__(self):
        pts = tuple(complex(p) for p in self.points)
        if not pts:
            raise ValueError("singularity set is empty")
        for p in pts:
            if not p.imag > 0:
                raise DomainError(f"singularity {p} must have positive imaginary part")
        object.__setattr__(self, "points", pts)

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class PreimageSet:
    """Pre-images ``psi^{-1}(delta_k + i eps_k)`` sorted by real part."""

    points: tuple[complex, ...]

    def __post_init__(self):
        pts = tuple(complex(p) for p in self.points)
        if not pts:
            raise ValueError("pre-image set is empty")
        for p in pts:
            if not p.imag > 0:
                raise DomainError(f"pre-image {p} must have positive imaginary part")
        re = [p.real for p in pts]
        if any(b <= a for a, b in zip(re, re[1:])):
            raise ValueError("pre-images must be strictly sorted by real part")
        object.__setattr__(self, "points", pts)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.points, dtype=complex)

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class ParameterSolution:
    map: SinhPolyMap
    constraint_residual: float
    objective: float
    homotopy_steps: int
    iterations: int = 0

    def to_json(self) -> dict:
        return {
            "u0": self.map.u0,
            "u": list(self.map.u),
            "x": list(self.map.abscissas),
            "residual": self.constraint_residual,
        }


def preimages(singularities: Iterable[complex] | SingularitySet, outer: OuterMap) -> PreimageSet:
    """Map singularities through ``psi^{-1}`` and sort by real part.

    Each singularity stands for a conjugate pair; the pre-image kept is the
    member of the pair in the upper half plane.  Real-part ties are broken
    by nudging the later point by 1e-9.
    """
    s = singularities if isinstance(singularities, SingularitySet) else SingularitySet(tuple(singularities))
    w = []
    for p in s.points:
        q = complex(outer.inverse(complex(p)))
        if q.imag < 0:
            # psi^{-1} commutes with conjugation, so the pair's upper member
            # is the image of the conjugate singularity
            q = q.conjugate()
        if not q.imag > 0:
            raise DomainError(f"pre-image of {p} under {outer.kind.value} map lies on the real axis")
        w.append(q)
    w.sort(key=lambda z: z.real)
    for i in range(1, len(w)):
        if w[i].real <= w[i - 1].real:
            warnings.warn(f"pre-images {w[i - 1]} and {w[i]} share a real part; perturbing",
                          RuntimeWarning, stacklevel=2)
            w[i] = complex(w[i - 1].real + 1e-9, w[i].imag)
    return PreimageSet(tuple(w))


def beta2_of(m: SinhPolyMap, outer: OuterMap) -> float:
    """Double exponential decay constant implied by a map's sinh coefficient."""
    if m.u0 <= 0:
        raise ValueError("u0 must be positive")
    if outer.kind is OuterKind.FINITE_TANH:
        return 0.5 * m.u0
    return m.u0


# --- constraint system ----------------------------------------------------


class _System:
    """Constraints ``h(x_k + i pi/2) = w_k`` in the packed variable ``v``.

    ``v = (u0, u_1..u_n, x_1..x_n)``.
    """

    def __init__(self, target: np.ndarray):
        self.w = np.asarray(target, dtype=complex)
        self.n = len(self.w)
        self.j = np.arange(self.n)

    def split(self, v):
        n = self.n
        return v[0], v[1:n + 1], v[n + 1:]

    def _powers(self, x):
        z = x + 1j * HALF_PI
        return z, z[:, None] ** self.j[None, :]

    def residual(self, v):
        u0, u, x = self.split(v)
        _, Z = self._powers(x)
        with np.errstate(over="ignore", invalid="ignore"):
            r = 1j * u0 * np.cosh(x) + Z @ u - self.w
        return np.concatenate([r.real, r.imag])

    def _dP(self, u, z):
        n = self.n
        dp = np.zeros_like(z)
        d2p = np.zeros_like(z)
        for j in range(1, n):
            dp += j * u[j] * z ** (j - 1)
        for j in range(2, n):
            d2p += j * (j - 1) * u[j] * z ** (j - 2)
        return dp, d2p

    def jacobian(self, v):
        n = self.n
        u0, u, x = self.split(v)
        z, Z = self._powers(x)
        dp, _ = self._dP(u, z)
        J = np.zeros((2 * n, 2 * n + 1))
        idx = np.arange(n)
        with np.errstate(over="ignore", invalid="ignore"):
            J[n:, 0] = np.cosh(x)
            J[:n, 1:n + 1] = Z.real
            J[n:, 1:n + 1] = Z.imag
            J[idx, n + 1 + idx] = dp.real
            J[n + idx, n + 1 + idx] = u0 * np.sinh(x) + dp.imag
        return J

    def lagrangian_curvature(self, v, lam, d):
        """``d^T (sum_i lam_i grad^2 c_i) d`` for direction ``d``."""
        n = self.n
        u0, u, x = self.split(v)
        z, _ = self._powers(x)
        _, d2p = self._dP(u, z)
        du0, du, dx = self.split(d)
        # d/du_j of P'(z) is (j-1) z^(j-2) in 1-based terms
        dPu = np.zeros(n, dtype=complex)
        for j in range(1, n):
            dPu += j * du[j] * z ** (j - 1)
        lam_re, lam_im = lam[:n], lam[n:]
        curv_re = d2p.real * dx ** 2 + 2 * dx * dPu.real
        curv_im = ((u0 * np.cosh(x) + d2p.imag) * dx ** 2
                   + 2 * dx * (dPu.imag + np.sinh(x) * du0))
        return float(lam_re @ curv_re + lam_im @ curv_im)


def quotient_objective(u: Sequence[float], x: Sequence[float], target: Sequence[complex]) -> float:
    """``u0`` recovered from the summed imaginary constraints.

    ``sum_k (eps_k - Im P(x_k + i pi/2)) / sum_k cosh(x_k)``.
    """
    u = np.asarray(u, dtype=float)
    x = np.asarray(x, dtype=float)
    w = np.asarray(target, dtype=complex)
    z = x + 1j * HALF_PI
    Pz = (z[:, None] ** np.arange(len(u))[None, :]) @ u
    return float(np.sum(w.imag - Pz.imag) / np.sum(np.cosh(x)))


def constraint_residual(m: SinhPolyMap, target: Sequence[complex]) -> float:
    """Max-norm of ``h(x_k + i pi/2) - w_k`` for a solved map."""
    x = np.asarray(m.abscissas, dtype=float)
    w = np.asarray(target, dtype=complex)
    return float(np.max(np.abs(m(x + 1j * HALF_PI) - w)))


# --- solver ---------------------------------------------------------------


def initial_guess(pre: PreimageSet) -> ParameterSolution:
    """Exact solution of the collinear problem ``{d_bar + i e_k}``.

    ``d_bar`` and ``e_bar`` belong to the pre-image with the smallest
    imaginary part; the map is ``h(t) = e_bar sinh t + d_bar``.
    """
    w = pre.array
    n = len(w)
    kbar = int(np.argmin(w.imag))
    ebar, dbar = w[kbar].imag, w[kbar].real
    ratio = np.maximum(w.imag / ebar, 1.0)
    x = np.arccosh(ratio)
    x[:kbar] *= -1.0
    x[kbar] = 0.0
    u = [dbar] + [0.0] * (n - 1)
    m = SinhPolyMap(ebar, tuple(u), tuple(x))
    return ParameterSolution(m, 0.0, ebar, 0, 0)


def _collinear_target(w: np.ndarray) -> np.ndarray:
    kbar = int(np.argmin(w.imag))
    return w[kbar].real + 1j * w.imag


def _restore(sys: _System, v: np.ndarray, fixed: np.ndarray | None, tol: float = 1e-13,
             max_iter: int = 50) -> tuple[np.ndarray, float]:
    """Minimum-norm Newton projection of ``v`` onto the constraint set.

    ``fixed`` is an optional extra linear equality row ``a^T v = b`` stored as
    ``(a, b)`` concatenated.
    """
    scale = max(1.0, float(np.max(np.abs(sys.w))))
    res = np.inf
    for _ in range(max_iter):
        c = sys.residual(v)
        J = sys.jacobian(v)
        if fixed is not None:
            a, b = fixed[:-1], fixed[-1]
            c = np.append(c, a @ v - b)
            J = np.vstack([J, a])
        res = float(np.max(np.abs(c)))
        if not np.isfinite(res):
            break
        if res <= tol * scale:
            return v, res
        dv = np.linalg.lstsq(J, -c, rcond=None)[0]
        v_new = v + dv
        # damp wild corrections
        damp = 1.0
        while damp > 1e-4:
            r_new = np.max(np.abs(sys.residual(v_new)))
            if np.isfinite(r_new) and r_new < max(res, 1e-300) * 2.0:
                break
            damp *= 0.5
            v_new = v + damp * dv
        v = v_new
    return v, res


def _tangent(J: np.ndarray) -> np.ndarray:
    _, _, vt = np.linalg.svd(J)
    d = vt[-1]
    return d if d[0] >= 0 else -d


def _ascend(sys: _System, v: np.ndarray, xbar: float) -> tuple[np.ndarray, int]:
    """Maximize ``u0`` along the feasible curve starting at a feasible ``v``."""
    n = sys.n
    bound_row = np.zeros(2 * n + 1)
    bound_row[n + 1] = 1.0
    bound_row[-1] = 1.0
    radius = 1.0
    active = None
    it = 0
    for it in range(1, MAX_ITER + 1):
        if active is not None:
            J = np.vstack([sys.jacobian(v), bound_row])
            # multiplier of the bound row tells whether it still binds
            lam = np.linalg.lstsq(J.T, np.eye(2 * n + 1)[0], rcond=None)[0]
            if lam[-1] * active > 0:
                return v, it
            active = None
        J = sys.jacobian(v)
        d = _tangent(J)
        g = d[0]
        lam = np.linalg.lstsq(J.T, np.eye(2 * n + 1)[0], rcond=None)[0]
        curv = -sys.lagrangian_curvature(v, lam, d)
        if curv < 0:
            alpha = -g / curv
            alpha = max(-radius, min(radius, alpha))
        else:
            alpha = radius if g > 0 else -radius
        if abs(g) <= 1e-15 or abs(alpha) <= 1e-13:
            return v, it
        u0_old = v[0]
        while True:
            trial = v + alpha * d
            s = trial[n + 1] + trial[-1]
            hit = None
            if abs(s) > xbar:
                s0 = v[n + 1] + v[-1]
                ds = d[n + 1] + d[-1]
                sign = 1.0 if s > 0 else -1.0
                if ds != 0:
                    alpha = (sign * xbar - s0) / ds
                trial = v + alpha * d
                hit = sign
            fixed = np.append(bound_row, hit * xbar) if hit is not None else None
            trial, res = _restore(sys, trial, fixed)
            if np.isfinite(res) and res <= 1e-11 and trial[0] >= u0_old - 1e-15 * abs(u0_old):
                break
            alpha *= 0.5
            radius = max(abs(alpha), 1e-12)
            if abs(alpha) < 1e-14:
                return v, it
        step = np.max(np.abs(trial - v))
        v = trial
        if hit is not None:
            active = hit
            continue
        if curv < 0 and abs(alpha) < radius:
            radius = max(radius, 2 * abs(alpha))
        else:
            radius = min(4.0, 2 * radius)
        if step <= 1e-13 * max(1.0, float(np.max(np.abs(v)))):
            return v, it
    return v, it


def _solve_at(sys: _System, v0: np.ndarray, xbar: float, tau: float) -> tuple[np.ndarray, int]:
    v, res = _restore(sys, v0.copy(), None)
    if not (np.isfinite(res) and res <= 1e-11):
        raise OptimizationError(f"constraint restoration failed at tau={tau:.4f} (residual {res:.3g})", tau)
    v, it = _ascend(sys, v, xbar)
    res = float(np.max(np.abs(sys.residual(v))))
    if not res <= RESIDUAL_TOL or v[0] <= 0:
        raise OptimizationError(f"parameter program did not converge at tau={tau:.4f} "
                                f"(residual {res:.3g}, u0 {v[0]:.3g})", tau)
    return v, it


def check_monotone(m: SinhPolyMap, lo: float = -15.0, hi: float = 15.0, points: int = 3001) -> None:
    """Raise if ``h'`` is not strictly positive on a grid over ``[lo, hi]``."""
    t = np.linspace(lo, hi, points)
    dh = m.deriv(t)
    if not np.all(dh > 0):
        bad = t[np.argmin(dh)]
        raise MonotonicityError(f"map derivative is non-positive near t={bad:.3f}; "
                                "the polynomial correction destroys monotonicity")


def _homotopy(pre: PreimageSet, xbar: float, steps: int) -> ParameterSolution:
    w = pre.array
    n = len(w)
    start = initial_guess(pre)
    v = np.concatenate([[start.map.u0], start.map.u, start.map.abscissas])
    w0 = _collinear_target(w)
    total = 0
    for i in range(1, steps + 1):
        tau = i / steps
        sys = _System((1 - tau) * w0 + tau * w)
        v, it = _solve_at(sys, v, xbar, tau)
        total += it
    sys = _System(w)
    res = float(np.max(np.abs(sys.residual(v))))
    m = SinhPolyMap(float(v[0]), tuple(v[1:n + 1]), tuple(v[n + 1:]))
    return ParameterSolution(m, res, float(v[0]), steps, total)


def solve_parameter_problem(pre: PreimageSet, xbar: float = 20.0, steps: int = 16) -> ParameterSolution:
    """Maximize ``u0`` subject to the pre-image constraints.

    Args:
        pre: sorted singularity pre-images.
        xbar: bound on ``|x_1 + x_n|`` for ``n >= 2``.
        steps: number of uniform homotopy increments; doubled on failure
            up to 256.

    Raises:
        OptimizationError: if every homotopy discretization fails.
        MonotonicityError: if the solved map is not increasing on [-15, 15].
    """
    if xbar <= 0:
        raise ValueError("xbar must be positive")
    n = len(pre)
    if n == 1:
        w = pre.points[0]
        m = SinhPolyMap(w.imag, (w.real,), (0.0,))
        return ParameterSolution(m, constraint_residual(m, pre.points), m.u0, 0, 0)
    last = None
    while steps <= MAX_STEPS:
        try:
            sol = _homotopy(pre, xbar, steps)
            break
        except OptimizationError as exc:
            log.debug("homotopy with %d steps failed: %s", steps, exc)
            last = exc
            steps *= 2
    else:
        raise OptimizationError(f"parameter program failed with up to {MAX_STEPS} homotopy steps: {last}",
                                last.tau if last else None)
    check_monotone(sol.map)
    return sol


def optimize_map(singularities: Iterable[complex], outer: OuterMap, xbar: float = 20.0,
                 steps: int = 16) -> ParameterSolution:
    """Pre-images followed by the parameter program."""
    return solve_parameter_problem(preimages(singularities, outer), xbar, steps)
