"""Right inverse Phi of the Laplace exponent and related exponents.

``Phi(q)`` is the largest root of ``psi(theta) = q``.  From it we derive the
derivatives of ``Phi`` (chain rule plus the Faà di Bruno / partial Bell
recursion), ``eta(q) = q/Phi(q)`` and the exponent ``phi`` of the killed
subordinator conjugate to the upward passage process, which satisfies
``theta*phi(theta) = psi(theta)``.
"""
from __future__ import annotations

import math
import threading
from typing import Callable

import numpy as np
from scipy import integrate

from .bell import MAX_ORDER, partial_bell
from .errors import DomainError, QuadratureError, RootFindingError
from .model import (
    CompoundPoisson,
    Deterministic,
    Exponential,
    LevyModel,
    LogNormal,
    Pareto,
    Regime,
    StableJumps,
    laplace_exponent,
    laplace_exponent_derivative,
    mean,
    regime,
)

__all__ = [
    "InverseExponent",
    "phi",
    "phi_derivative",
    "eta",
    "conjugate_exponent",
    "solve_increasing",
]

_EPS = np.finfo(float).eps


def solve_increasing(f: Callable[[float], float], fprime: Callable[[float], float],
                     target: float, lo: float, hi: float, ftol: float,
                     maxiter: int = 200) -> float:
    """Root of ``f(x) = target`` for increasing ``f`` with f(lo) <= target < f(hi).

    Newton iteration started from the right end of the bracket; steps that
    leave the bracket or stall are replaced by bisection.  For convex ``f``
    Newton from the right converges monotonically.
    """
    x = hi
    for it in range(maxiter):
        fx = f(x) - target
        if abs(fx) <= ftol:
            return x
        if fx > 0:
            hi = x
        else:
            lo = x
        if hi - lo <= 4 * _EPS * max(abs(hi), 1e-300):
            return x
        d = fprime(x)
        step_ok = d > 0 and math.isfinite(d)
        xn = x - fx / d if step_ok else math.nan
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
        elif abs(xn - x) <= 2 * _EPS * abs(x):
            return xn
        x = xn
    raise RootFindingError("root finder did not converge", target=target, lo=lo, hi=hi,
                           iterations=maxiter)


def _expand_bracket(f, target, start, maxdoublings=1100):
    hi = start
    for _ in range(maxdoublings):
        val = f(hi)
        if val > target:
            return hi
        hi *= 2.0
    raise RootFindingError("could not bracket root", target=target, last=hi)


class InverseExponent:
    """Evaluator of Phi, its derivatives, eta and the conjugate exponent.

    The bracket cache only speeds up consecutive solves; it is thread-local.
    """

    def __init__(self, model: LevyModel, tolerance: float = 1e-12):
        self.model = model
        self.tolerance = tolerance
        self.regime = regime(model)
        self.mean = mean(model)
        self._local = threading.local()
        self._theta_min = None
        self._phi0 = None

    # -- psi shortcuts --------------------------------------------------------
    def psi(self, theta):
        return laplace_exponent(self.model, theta)

    def dpsi(self, theta, k=1):
        return laplace_exponent_derivative(self.model, theta, k)

    # -- roots ----------------------------------------------------------------
    @property
    def theta_min(self) -> float:
        """Minimiser of psi on [0, inf); 0 unless the process drifts down."""
        if self._theta_min is None:
            if self.regime is not Regime.DRIFTS_DOWN:
                self._theta_min = 0.0
            else:
                d1 = lambda t: self.dpsi(t, 1)
                d2 = lambda t: self.dpsi(t, 2)
                hi = _expand_bracket(d1, 0.0, 1.0)
                scale = max(abs(self.mean), 1.0)
                self._theta_min = solve_increasing(d1, d2, 0.0, 0.0, hi,
                                                   ftol=1e-3 * self.tolerance * scale)
        return self._theta_min

    def _last(self):
        return getattr(self._local, "last", 1.0)

    def phi(self, q: float) -> float:
        """Phi(q) = sup{theta >= 0 : psi(theta) = q}."""
        if not q >= 0:
            raise DomainError(f"q must be >= 0, got {q}")
        q = float(q)
        if q == 0:
            if self.regime is not Regime.DRIFTS_DOWN:
                return 0.0
            if self._phi0 is not None:
                return self._phi0
        lo = self.theta_min
        start = max(1.0, 2.0 * lo, self._last())
        if start <= lo:
            start = lo + 1.0
        hi = _expand_bracket(self.psi, q, start)
        # the doubling start may already exceed the root by far; shrink while valid
        while hi > 2.0 * max(lo, 1e-300) and hi / 2 > lo and self.psi(hi / 2) > q:
            hi /= 2.0
        # relative residual: small q must not be swamped by an absolute floor
        ftol = 1e-3 * self.tolerance * (q if q > 0 else 1.0)
        root = solve_increasing(self.psi, self.dpsi, q, lo, hi, ftol=ftol)
        self._local.last = root
        if q == 0:
            self._phi0 = root
        return root

    def phi_derivative(self, q: float, n: int) -> float:
        """n-th derivative of Phi at q > 0, or at 0+ when the process drifts up."""
        if n < 1 or int(n) != n:
            raise DomainError(f"n must be a positive integer, got {n}")
        n = int(n)
        if n > MAX_ORDER:
            raise DomainError(f"derivatives supported up to order {MAX_ORDER}")
        if not q >= 0:
            raise DomainError(f"q must be >= 0, got {q}")
        if q == 0 and self.regime is not Regime.DRIFTS_UP:
            raise DomainError("Phi derivatives at 0+ require psi'(0+) > 0")
        theta = self.phi(q)
        if q == 0:
            d_n = self.dpsi(0.0, n)
            if not math.isfinite(d_n):
                # Phi is a Bernstein function: sign(Phi^(n)) = (-1)^(n+1)
                return (-1) ** (n + 1) * math.inf
        psi_d = [None] + [self.dpsi(theta, k) for k in range(1, n + 1)]
        derivs = [None, 1.0 / psi_d[1]]
        for m in range(2, n + 1):
            acc = 0.0
            for j in range(1, m):
                acc += psi_d[m + 1 - j] * partial_bell(m, m + 1 - j, derivs[1:j + 1])
            derivs.append(-acc / psi_d[1])
        return derivs[n]

    def eta(self, q: float) -> float:
        """q/Phi(q), extended continuously to q = 0."""
        if not q >= 0:
            raise DomainError(f"q must be >= 0, got {q}")
        if q == 0:
            return self.mean if self.regime is not Regime.DRIFTS_DOWN else 0.0
        return q / self.phi(q)

    def conjugate_exponent(self, theta: float) -> float:
        """phi(theta) = psi'(0+) + sigma2/2*theta + int (1-e^{-theta y}) Pi((y,inf)) dy."""
        if self.regime is Regime.DRIFTS_DOWN:
            raise DomainError("conjugate exponent requires psi'(0+) >= 0")
        if not theta >= 0:
            raise DomainError(f"theta must be >= 0, got {theta}")
        theta = float(theta)
        base = self.mean + 0.5 * self.model.gaussian_var * theta
        if theta == 0 or self.model.jumps is None:
            return base
        return base + integrated_tail_transform(self.model, theta)


# ---------------------------------------------------------------------------
# integrated tail  int_0^inf (1 - exp(-theta y)) Pi((y, inf)) dy
# ---------------------------------------------------------------------------

_QUAD = dict(epsabs=0.0, epsrel=1e-13, limit=400)


def _quad(f, a, b, **kw):
    opts = dict(_QUAD)
    opts.update(kw)
    val, err = integrate.quad(f, a, b, **opts)
    if not math.isfinite(val) or err > 1e-9 * max(abs(val), 1e-300) + 1e-15:
        raise QuadratureError("tail integral did not converge", a=a, b=b, value=val, error=err)
    return val


def _power_tail_piece(coef, alpha, theta, lo):
    """int_lo^inf (1 - exp(-theta y)) coef*y^(-alpha) dy for alpha > 1.

    Split at Y with theta*Y >= 60: beyond Y the exponential is below e^-60
    and the remaining integral is analytic.
    """
    Y = max(lo, 60.0 / theta)
    head = 0.0
    if Y > lo:
        g = lambda s: -math.expm1(-theta * math.exp(s)) * math.exp(s * (1.0 - alpha))
        head = coef * _quad(g, math.log(lo), math.log(Y))
    return head + coef * Y ** (1.0 - alpha) / (alpha - 1.0)


def integrated_tail_transform(model: LevyModel, theta: float) -> float:
    """Quadrature of int_0^inf (1 - exp(-theta*y)) Pi((y, inf)) dy."""
    jumps = model.jumps
    one_minus = lambda y: -math.expm1(-theta * y)
    if isinstance(jumps, StableJumps):
        a = jumps.alpha
        coef = jumps.density_constant / a
        # [0, 1]: algebraic weight y^(1-alpha) times a smooth factor
        g = lambda y: theta if y == 0 else one_minus(y) / y
        head = _quad(g, 0.0, 1.0, weight="alg", wvar=(1.0 - a, 0.0))
        return coef * (head + _power_tail_piece(1.0, a, theta, 1.0))
    assert isinstance(jumps, CompoundPoisson)
    lam, claim = jumps.rate, jumps.claim
    if isinstance(claim, Exponential):
        f = lambda y: one_minus(y) * math.exp(-claim.mu * y)
        return lam * (_quad(f, 0.0, 1.0) + _quad(f, 1.0, math.inf))
    if isinstance(claim, Deterministic):
        return lam * _quad(one_minus, 0.0, claim.a)
    if isinstance(claim, Pareto):
        body = _quad(one_minus, 0.0, claim.xm)
        coef = claim.xm ** claim.alpha
        return lam * (body + _power_tail_piece(coef, claim.alpha, theta, claim.xm))
    if isinstance(claim, LogNormal):
        from .model import _LOGNORMAL_ZCUT
        top = math.exp(claim.m + claim.s * _LOGNORMAL_ZCUT)
        f = lambda y: one_minus(y) * float(claim.survival(y))
        pts = sorted({1.0, math.exp(claim.m)} | ({top} if top > 1.0 else set()))
        edges = [0.0] + [p for p in pts if p < top] + [top]
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            if b > a:
                total += _quad(f, a, b)
        return lam * total
    raise DomainError(f"unsupported claim family {claim!r}")


# module-level functional interface ------------------------------------------

def phi(inv: InverseExponent, q: float) -> float:
    return inv.phi(q)


def phi_derivative(inv: InverseExponent, q: float, n: int) -> float:
    return inv.phi_derivative(q, n)


def eta(inv: InverseExponent, q: float) -> float:
    return inv.eta(q)


def conjugate_exponent(inv: InverseExponent, theta: float) -> float:
    return inv.conjugate_exponent(theta)
