"""q-scale functions and the passage-time Laplace transform.

``W^(q)`` is the function on ``[0, inf)`` whose Laplace transform is
``1/(psi(beta) - q)`` for ``beta > Phi(q)``; ``Z^(q)(x) = 1 + q*int_0^x W^(q)``.
They give ``E[exp(-q*tau_x); tau_x < inf] = Z^(q)(x) - q/Phi(q)*W^(q)(x)``.

Brownian motion and exponential-jump models have rational Laplace exponents
and are inverted exactly by partial fractions.  Everything else goes through
a fixed-contour Talbot inversion (or the Abate-Whitt Euler algorithm when the
exponent has no continuation into the left half plane).
"""
from __future__ import annotations

import math
from functools import lru_cache

import mpmath
import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate

from .errors import DomainError, InversionError, QuadratureError
from .inverse import InverseExponent
from .model import (
    CompoundPoisson,
    Deterministic,
    Exponential,
    LevyModel,
    LogNormal,
    Regime,
    StableJumps,
    laplace_exponent_complex,
)

__all__ = [
    "ScaleEvaluator",
    "scale_W",
    "scale_Z",
    "passage_lt",
    "ruin_probability",
    "talbot_inversion",
    "euler_inversion",
]


# ---------------------------------------------------------------------------
# inversion engines
# ---------------------------------------------------------------------------

def talbot_inversion(F, t: float, terms: int = 32) -> float:
    """Fixed Talbot inversion of a vectorised transform ``F`` at time ``t > 0``.

    Abate-Valkó contour s(theta) = r*theta*(cot(theta) + i), r = 2M/(5t);
    all singularities of F must lie on or left of the negative real axis
    within the contour.
    """
    M = terms
    k = np.arange(1, M)
    th = k * np.pi / M
    cot = 1.0 / np.tan(th)
    r = 2.0 * M / (5.0 * t)
    nodes = np.concatenate([[r + 0j], r * th * (cot + 1j)])
    sigma = th + (th * cot - 1.0) * cot
    vals = np.asarray(F(nodes), dtype=complex)
    acc = 0.5 * math.exp(r * t) * vals[0].real
    acc += np.sum((np.exp(t * nodes[1:]) * vals[1:] * (1.0 + 1j * sigma)).real)
    return float(r / M * acc)


def euler_inversion(F, t: float, n: int = 38, m: int = 11, A: float = 18.4,
                    compare: int | None = None):
    """Abate-Whitt Euler-summed Fourier series inversion along Re(s) = A/(2t).

    Only needs ``F`` on a vertical line in the right half plane.  With
    ``compare`` set, also returns the estimate from the first ``compare``
    series terms (same nodes, no extra transform evaluations).
    """
    k = np.arange(0, n + m + 1)
    nodes = (A + 2j * np.pi * k) / (2.0 * t)
    vals = np.asarray(F(nodes), dtype=complex).real
    terms = vals * (-1.0) ** k
    terms[0] *= 0.5
    partial = np.cumsum(terms) * math.exp(A / 2.0) / t
    weights = np.array([math.comb(m, j) for j in range(m + 1)], dtype=float) / 2.0**m
    hi = float(np.dot(weights, partial[n:n + m + 1]))
    if compare is None:
        return hi
    return hi, float(np.dot(weights, partial[compare:compare + m + 1]))


# ---------------------------------------------------------------------------
# exact partial fractions for rational exponents
# ---------------------------------------------------------------------------

class _RationalExponent:
    """psi(beta) - q = N_q(beta)/D(beta) with polynomial N_q and D."""

    def __init__(self, model: LevyModel):
        p, s2 = model.drift, model.gaussian_var
        poly = Polynomial([0.0, p, 0.5 * s2])
        if model.jumps is None:
            self.D = Polynomial([1.0])
            self.N0 = poly
        else:
            mu, lam = model.jumps.claim.mu, model.jumps.rate
            self.D = Polynomial([mu, 1.0])
            self.N0 = poly * self.D + Polynomial([0.0, -lam])

    @staticmethod
    def supports(model: LevyModel) -> bool:
        if model.jumps is None:
            return True
        return isinstance(model.jumps, CompoundPoisson) and isinstance(model.jumps.claim, Exponential)

    def numerator(self, q):
        return self.N0 - q * self.D


def _polish(poly: Polynomial, root, steps=3):
    d = poly.deriv()
    for _ in range(steps):
        dv = d(root)
        if dv == 0:
            break
        root = root - poly(root) / dv
    return root


# below this q the rational-exponent transform equals its q = 0 limit in doubles
_Q_NEGLIGIBLE = 1e-60


class _DeterministicSeries:
    """Exact W for compound Poisson claims of fixed size a (no Gaussian part).

    Expanding 1/(psi - q) in powers of exp(-a*beta) gives
    W(x) = sum_{n <= x/a} (-lam)^n (x - na)^n exp(c(x - na)) / (n! p^(n+1)),
    c = (q + lam)/p.  The sum alternates, so it runs in extended precision.
    """

    max_dps = 1500

    def __init__(self, model: LevyModel):
        self.p = model.drift
        self.lam = model.jumps.rate
        self.a = model.jumps.claim.a

    @staticmethod
    def supports(model: LevyModel) -> bool:
        return (model.gaussian_var == 0 and isinstance(model.jumps, CompoundPoisson)
                and isinstance(model.jumps.claim, Deterministic))

    def dps(self, q, x):
        c = (q + self.lam) / self.p
        # size of the largest term relative to the result, in digits
        return int(30 + (c * x + self.lam * x / self.p) / math.log(10))

    def _terms(self, q, x, integrated):
        p, lam, a = mpmath.mpf(self.p), mpmath.mpf(self.lam), mpmath.mpf(self.a)
        c = (mpmath.mpf(q) + lam) / p
        x = mpmath.mpf(x)
        total = mpmath.mpf(0)
        n = 0
        while x - n * a > 0:
            u = x - n * a
            if integrated:
                # int_0^u v^n e^{cv} dv
                part = mpmath.gammainc(n + 1, 0, -c * u) * (-1) ** (n + 1) / c ** (n + 1) \
                    if c != 0 else u ** (n + 1) / (n + 1)
                part = mpmath.re(part)
            else:
                part = u**n * mpmath.exp(c * u)
            total += (-lam) ** n * part / (mpmath.factorial(n) * p ** (n + 1))
            n += 1
        return total

    def W(self, q, x):
        with mpmath.workdps(self.dps(q, x)):
            return float(self._terms(q, x, False))

    def _phi(self, q, start):
        # Newton polish of Phi(q) at the working precision; eta = q/Phi must
        # carry as many digits as the cancellation in Z - eta*W removes
        p, lam, a = mpmath.mpf(self.p), mpmath.mpf(self.lam), mpmath.mpf(self.a)
        th = mpmath.mpf(start)
        for _ in range(200):
            e = mpmath.exp(-a * th)
            step = (p * th - lam * (1 - e) - q) / (p - lam * a * e)
            th -= step
            if abs(step) <= abs(th) * mpmath.mpf(10) ** (-mpmath.mp.dps + 5):
                break
        return th

    def passage_lt(self, q, x, phi_q):
        """1 + q*int_0^x W - eta*W(x), or None when too many digits are needed."""
        dps = self.dps(q, x)
        if dps > self.max_dps:
            return None
        with mpmath.workdps(dps):
            qm = mpmath.mpf(q)
            eta = qm / self._phi(qm, phi_q)
            val = 1 + qm * self._terms(q, x, True) - eta * self._terms(q, x, False)
            return float(val)


# ---------------------------------------------------------------------------
# evaluator
# ---------------------------------------------------------------------------

class ScaleEvaluator:
    """Scale functions, passage-time transforms and ruin probabilities.

    Parameters
    ----------
    model : LevyModel
    terms : int
        Number of Talbot contour nodes.
    eps_inv : float
        Accepted disagreement between inversions with ``terms`` and
        ``terms - 8`` nodes, relative to the result.
    method : {None, "closed-form", "talbot", "euler"}
        Force an inversion path; ``None`` picks partial fractions when the
        exponent is rational, Euler for lognormal claims, Talbot otherwise.
    """

    def __init__(self, model: LevyModel, terms: int = 32, eps_inv: float = 1e-8,
                 inverse: InverseExponent | None = None, method: str | None = None):
        self.model = model
        self.terms = terms
        self.eps_inv = eps_inv
        self.inverse = inverse or InverseExponent(model)
        self.regime = self.inverse.regime
        self.mean = self.inverse.mean
        if method is None:
            if _RationalExponent.supports(model):
                method = "closed-form"
            elif isinstance(model.jumps, CompoundPoisson):
                # non-exponential claims: the transform either lacks a
                # continuation to the left or W has kinks at claim atoms
                method = "euler"
            else:
                method = "talbot"
        if method == "closed-form" and not _RationalExponent.supports(model):
            raise DomainError(f"no closed form for {model.kind} model")
        if method not in ("closed-form", "talbot", "euler"):
            raise DomainError(f"unknown inversion method {method!r}")
        self.method = method
        # claim laws with atoms or density jumps make W kinked; the Fourier
        # series then converges algebraically and needs many more terms
        kinked = isinstance(model.jumps, CompoundPoisson) and bool(model.jumps.claim.breakpoints())
        self.euler_terms = 400 if kinked else 38
        self._rational = _RationalExponent(model) if method == "closed-form" else None
        self._series = _DeterministicSeries(model) if _DeterministicSeries.supports(model) else None
        self._poles = lru_cache(maxsize=256)(self._compute_poles)

    # -- metadata -------------------------------------------------------------
    @property
    def experimental(self) -> bool:
        return isinstance(self.model.jumps, StableJumps)

    @property
    def method_tag(self) -> str:
        return "closed-form" if self.method == "closed-form" else "inversion"

    @property
    def accuracy(self) -> float:
        """Rough absolute accuracy of passage_lt values."""
        return 1e-15 if self.method == "closed-form" else max(self.eps_inv * 1e-2, 1e-11)

    @property
    def w_at_zero(self) -> float:
        """W^(q)(0+): 1/drift for bounded variation, 0 otherwise."""
        if self.model.bounded_variation:
            return 1.0 / self.model.drift
        return 0.0

    # -- helpers --------------------------------------------------------------
    def psi_c(self, beta):
        return laplace_exponent_complex(self.model, beta)

    def _compute_poles(self, q):
        """(zero multiplicity, Phi(q) if > 0, other roots, N_q) for rational psi."""
        N = self._rational.numerator(q)
        rest = N
        zero_mult = 0
        if q == 0:
            zero_mult = 2 if self.regime is Regime.OSCILLATES else 1
            rest = Polynomial(N.coef[zero_mult:])
        phi_q = self.inverse.phi(q)
        if phi_q > 0:
            rest, _ = divmod(rest, Polynomial([-phi_q, 1.0]))
        others = [_polish(N, complex(r)) for r in rest.roots()] if rest.degree() > 0 else []
        return zero_mult, phi_q, tuple(others), N

    def _invert(self, F, x, floor=0.0):
        """Invert F at x; the residual is measured against max(|value|, floor)."""
        if self.method == "euler":
            n = self.euler_terms
            if n > 60:
                # kinked W: the series error falls like n^-3, so the error
                # at n is about 1/7 of the change from n/2
                hi, lo = euler_inversion(F, x, n=n, compare=n // 2)
                resid = abs(hi - lo) / 7.0
            else:
                hi, lo = euler_inversion(F, x, n=n, compare=n - 8)
                resid = abs(hi - lo)
        else:
            hi = talbot_inversion(F, x, self.terms)
            lo = talbot_inversion(F, x, self.terms - 8)
            resid = abs(hi - lo)
        if not math.isfinite(hi) or resid > self.eps_inv * max(abs(hi), floor):
            raise InversionError("Laplace inversion did not reach requested precision",
                                 x=x, value=hi, residual=resid, eps_inv=self.eps_inv)
        return hi

    # -- scale functions ------------------------------------------------------
    def W(self, q: float, x: float) -> float:
        if not q >= 0:
            raise DomainError(f"q must be >= 0, got {q}")
        if x < 0:
            return 0.0
        if x == 0:
            return self.w_at_zero
        if self._rational is not None:
            return self._W_closed(q, x)
        if self._series is not None:
            return self._series.W(q, x)
        a = self.inverse.phi(q) + 0.3 / x
        F = lambda s: 1.0 / (self.psi_c(s + a) - q)
        return math.exp(a * x) * self._invert(F, x)

    def _W_closed(self, q, x):
        zero_mult, phi_q, others, N = self._poles(q)
        D = self._rational.D
        dN = N.deriv()
        total = 0.0
        simple = list(others)
        if phi_q > 0:
            simple.append(phi_q)
        if zero_mult == 1:
            simple.append(0.0)
        elif zero_mult == 2:
            N2 = Polynomial(N.coef[2:])
            r0 = D(0.0) / N2(0.0)
            r1 = (D.deriv()(0.0) * N2(0.0) - D(0.0) * N2.deriv()(0.0)) / N2(0.0) ** 2
            total += x * r0 + r1
        for r in simple:
            total += np.exp(r * x) * D(r) / dN(r)
        return float(np.real(total))

    def Z(self, q: float, x: float) -> float:
        if not q >= 0:
            raise DomainError(f"q must be >= 0, got {q}")
        if x <= 0 or q == 0:
            return 1.0
        val, err = integrate.quad(lambda y: self.W(q, y), 0.0, x, epsabs=0.0,
                                  epsrel=1e-11, limit=200)
        if err > 1e-8 * abs(val) + 1e-14:
            raise QuadratureError("Z quadrature did not converge", q=q, x=x, value=val, error=err)
        return 1.0 + q * val

    # -- passage times ----------------------------------------------------------
    def _check_x(self, x):
        if not x >= 0:
            raise DomainError(f"x must be >= 0, got {x}")
        if x == 0 and not self.model.bounded_variation:
            raise DomainError("x = 0 is excluded for processes of unbounded variation")

    def passage_lt(self, q: float, x: float) -> float:
        """E[exp(-q*tau_x); tau_x < inf] = Z^(q)(x) - eta(q)*W^(q)(x).

        Evaluated from the Laplace transform (in x) of the combination,
        (psi(b) - eta*b)/(b*(psi(b) - q)), whose pole at Phi(q) cancels; this
        avoids subtracting two exponentially large terms.
        """
        if not q >= 0:
            raise DomainError(f"q must be >= 0, got {q}")
        self._check_x(x)
        if q == 0 and self.regime is not Regime.DRIFTS_UP:
            return 1.0
        eta = self.inverse.eta(q)
        if x == 0:
            return _clip01(1.0 - eta * self.w_at_zero)
        if self._rational is not None:
            if q < _Q_NEGLIGIBLE:
                # the transform moves by O(sqrt(q)) at most here, and the pole
                # near -q/psi'(0+) would underflow
                return 1.0 if self.regime is not Regime.DRIFTS_UP else _clip01(self._lt_closed(0.0, x, 0.0))
            return _clip01(self._lt_closed(q, x, eta))
        if self._series is not None and q == 0:
            return _clip01(1.0 - self.mean * self._series.W(0.0, x))
        if self._series is not None and q > 0:
            val = self._series.passage_lt(q, x, self.inverse.phi(q))
            if val is not None:
                return _clip01(val)

        def G(s):
            psi = self.psi_c(s)
            return (psi - eta * s) / (s * (psi - q))

        return _clip01(self._invert(G, x, floor=1.0))

    def _lt_closed(self, q, x, eta):
        _, _, others, N = self._poles(q)
        D = self._rational.D
        dN = N.deriv()
        total = 0.0
        if q == 0:
            for r in others:
                total += np.exp(r * x) * D(r) / dN(r)
            return float(np.real(-self.mean * total))
        for r in others:
            total += np.exp(r * x) * (q - eta * r) * D(r) / (r * dN(r))
        return float(np.real(total))

    def ruin_probability(self, x: float) -> float:
        """P(tau_x < inf) = 1 - max(psi'(0+), 0)*W^(0)(x)."""
        return self.passage_lt(0.0, x)

    def transform(self, q: float, beta: float) -> float:
        """1/(psi(beta) - q), the Laplace transform of W^(q) at beta > Phi(q)."""
        return float(np.real(1.0 / (self.psi_c(complex(beta)) - q)))


def _clip01(v):
    # roundoff can push values a few ulps outside [0, 1]
    if -1e-12 < v < 0:
        return 0.0
    if 1 < v < 1 + 1e-12:
        return 1.0
    return v


# module-level functional interface ------------------------------------------

def scale_W(ev: ScaleEvaluator, q: float, x: float) -> float:
    return ev.W(q, x)


def scale_Z(ev: ScaleEvaluator, q: float, x: float) -> float:
    return ev.Z(q, x)


def passage_lt(ev: ScaleEvaluator, q: float, x: float) -> float:
    return ev.passage_lt(q, x)


def ruin_probability(ev: ScaleEvaluator, x: float) -> float:
    return ev.ruin_probability(x)
