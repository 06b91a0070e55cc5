"""Parametric spectrally negative Lévy models and their Laplace exponents.

Jumps are stored in the mirrored convention: the Lévy measure lives on
``(0, inf)`` and a jump of size ``y`` moves the process down by ``y``.  The
Laplace exponent is

    psi(theta) = b*theta + sigma2/2*theta**2 + J(theta),    J(0) = 0,

where ``b`` is the user-facing drift (the premium rate of a risk model) and
``J`` is the jump part of the family (``lambda*(E[exp(-theta*S)] - 1)`` for
compound Poisson, ``scale*theta**alpha`` for stable).  The compensated drift
of the canonical Lévy-Khintchine form is available from
:func:`compensated_drift`.
"""
from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from typing import Optional, Union

import mpmath
import numpy as np
from scipy import integrate, special, stats

from .errors import DomainError, ModelError, QuadratureError

__all__ = [
    "Exponential",
    "Pareto",
    "LogNormal",
    "Deterministic",
    "CompoundPoisson",
    "StableJumps",
    "LevyModel",
    "Regime",
    "laplace_exponent",
    "laplace_exponent_complex",
    "laplace_exponent_derivative",
    "jump_moment",
    "jump_moment_finite",
    "mean",
    "regime",
    "compensated_drift",
    "levy_tail",
]

_MP_DPS = 30
# standard normal quantile of the 1e-14 upper tail
_LOGNORMAL_ZCUT = float(stats.norm.isf(1e-14))
_LOGNORMAL_RTOL = 1e-10


def _h2(y):
    """exp(-y) - 1 + y without cancellation for y >= 0."""
    if y < 0.1:
        term, total = y * y / 2.0, 0.0
        k = 2
        while abs(term) > 1e-18 * abs(total) or k < 4:
            total += term
            k += 1
            term *= -y / k
        return total
    return math.expm1(-y) + y


def _h1(y):
    """1 - exp(-y)."""
    return -math.expm1(-y)


def _h2_over_sq(y):
    """(exp(-y) - 1 + y)/y^2, safe where y^2 underflows."""
    if y < 0.1:
        term, total, k = 0.5, 0.0, 2
        while abs(term) > 1e-18 * abs(total) or k < 4:
            total += term
            k += 1
            term *= -y / k
        return total
    return (math.expm1(-y) + y) / (y * y)


def _h1_over(y):
    """(1 - exp(-y))/y."""
    if y < 1e-8:
        return 1.0 - 0.5 * y
    return -math.expm1(-y) / y


# ---------------------------------------------------------------------------
# claim size distributions
# ---------------------------------------------------------------------------

class ClaimDistribution:
    """Positive claim size law of a compound Poisson jump part."""

    name = "claim"

    @property
    def moment_order_sup(self) -> float:
        return math.inf

    def moment_finite(self, r: float) -> bool:
        return r < self.moment_order_sup

    def has_mass_above(self, level: float) -> bool:
        return True

    def survival(self, y):
        raise NotImplementedError

    def moment(self, r: float) -> float:
        raise NotImplementedError

    def partial_moment(self, r: float, lower: float = 1.0) -> float:
        """E[S**r; S >= lower]."""
        raise NotImplementedError

    def laplace(self, theta, k: int = 0):
        """E[S**k exp(-theta*S)] for real or complex ``theta``."""
        raise NotImplementedError

    def laplace_defect(self, theta):
        """1 - E[exp(-theta*S)], computed without cancellation near 0."""
        return 1.0 - self.laplace(theta)

    def centered_laplace(self, theta: float) -> float:
        """E[exp(-theta*S) - 1 + theta*S] >= 0 for real theta >= 0."""
        return self.laplace(theta) - 1.0 + theta * self.moment(1)

    def centered_laplace1(self, theta: float) -> float:
        """E[S*(1 - exp(-theta*S))] >= 0 for real theta >= 0."""
        return self.moment(1) - self.laplace(theta, 1)

    def mean_exact(self) -> Optional[Fraction]:
        return None

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def breakpoints(self) -> tuple:
        return ()

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Exponential(ClaimDistribution):
    mu: float
    name = "exponential"

    def __post_init__(self):
        if not self.mu > 0:
            raise ModelError(f"exponential claims need mu > 0, got {self.mu}")

    def survival(self, y):
        y = np.asarray(y, dtype=float)
        return np.where(y < 0, 1.0, np.exp(-self.mu * np.maximum(y, 0.0)))

    def moment(self, r):
        return math.gamma(r + 1.0) / self.mu**r

    def partial_moment(self, r, lower=1.0):
        if lower <= 0:
            return self.moment(r)
        return float(special.gamma(r + 1.0) * special.gammaincc(r + 1.0, self.mu * lower)) / self.mu**r

    def laplace(self, theta, k=0):
        return math.factorial(k) * self.mu / (self.mu + theta) ** (k + 1)

    def laplace_defect(self, theta):
        return theta / (self.mu + theta)

    def centered_laplace(self, theta):
        x = theta / self.mu
        return x * x / (1.0 + x)

    def centered_laplace1(self, theta):
        x = theta / self.mu
        return x * (2.0 + x) / ((1.0 + x) ** 2 * self.mu)

    def mean_exact(self):
        return 1 / Fraction(self.mu)

    def sample(self, rng, size):
        return rng.exponential(1.0 / self.mu, size)

    def to_dict(self):
        return {"type": self.name, "mu": self.mu}


@dataclass(frozen=True)
class Pareto(ClaimDistribution):
    """Pareto law with density alpha*xm**alpha*y**(-alpha-1) on [xm, inf)."""

    alpha: float
    xm: float
    name = "pareto"

    def __post_init__(self):
        if not self.alpha > 1:
            raise ModelError(f"Pareto claims need tail alpha > 1, got {self.alpha}")
        if not self.xm > 0:
            raise ModelError(f"Pareto claims need xm > 0, got {self.xm}")

    @property
    def moment_order_sup(self):
        return self.alpha

    def survival(self, y):
        y = np.asarray(y, dtype=float)
        return np.where(y < self.xm, 1.0, (self.xm / np.maximum(y, self.xm)) ** self.alpha)

    def moment(self, r):
        if r >= self.alpha:
            return math.inf
        return self.alpha * self.xm**r / (self.alpha - r)

    def partial_moment(self, r, lower=1.0):
        if r >= self.alpha:
            return math.inf
        lo = max(lower, self.xm)
        return self.alpha * self.xm**self.alpha * lo ** (r - self.alpha) / (self.alpha - r)

    def _expint(self, order, z):
        with mpmath.workdps(_MP_DPS):
            return mpmath.expint(order, z)

    def laplace(self, theta, k=0):
        if theta == 0:
            return self.moment(k)
        with mpmath.workdps(_MP_DPS):
            val = self.alpha * self.xm**k * mpmath.expint(self.alpha + 1 - k, mpmath.mpmathify(theta) * self.xm)
        return _from_mp(val, theta)

    def laplace_defect(self, theta):
        if theta == 0:
            return 0.0
        # 1 - alpha*E_{alpha+1}(z) with E_{alpha+1} evaluated at raised precision
        with mpmath.workdps(_MP_DPS):
            z = mpmath.mpmathify(theta) * self.xm
            val = 1 - self.alpha * mpmath.expint(self.alpha + 1, z)
        return _from_mp(val, theta)

    def _centered_leading(self, theta, k):
        """Leading small-theta term, or None while the next term still matters.

        With z = theta*xm the centred transform is a*z^a*Gamma(-a) minus a
        power series starting at a*z^2/(2(2-a)); whichever power is lower
        leads and the other is relatively z^|a-2| smaller.
        """
        a = self.alpha
        z = theta * self.xm
        if a == 2 or z ** min(abs(a - 2.0), 1.0) >= 1e-17:
            return None
        if a > 2:
            m2 = self.moment(2)
            return 0.5 * m2 * theta * theta if k == 0 else m2 * theta
        c = a * special.gamma(-a)
        return c * z**a if k == 0 else c * a * self.xm * z ** (a - 1)

    def _centered(self, theta, k):
        if theta == 0:
            return 0.0
        lead = self._centered_leading(theta, k)
        if lead is not None:
            return lead
        # the subtraction loses about 2*log10(1/theta) digits
        dps = _MP_DPS + 2 * max(0, int(-math.log10(theta * self.xm)) + 1)
        with mpmath.workdps(dps):
            z = mpmath.mpf(theta) * self.xm
            a = mpmath.mpf(self.alpha)
            xm = mpmath.mpf(self.xm)
            mean = a * xm / (a - 1)
            if k == 0:
                val = a * mpmath.expint(a + 1, z) - 1 + mpmath.mpf(theta) * mean
            else:
                val = mean - a * xm * mpmath.expint(a, z)
            return float(val)

    def centered_laplace(self, theta):
        return self._centered(theta, 0)

    def centered_laplace1(self, theta):
        return self._centered(theta, 1)

    def mean_exact(self):
        a = Fraction(self.alpha)
        return a * Fraction(self.xm) / (a - 1)

    def sample(self, rng, size):
        return self.xm * (1.0 + rng.pareto(self.alpha, size))

    def breakpoints(self):
        return (self.xm,)

    def to_dict(self):
        return {"type": self.name, "alpha": self.alpha, "xm": self.xm}


@dataclass(frozen=True)
class LogNormal(ClaimDistribution):
    """S = exp(m + s*Z) with Z standard normal."""

    m: float
    s: float
    name = "lognormal"

    def __post_init__(self):
        if not self.s > 0:
            raise ModelError(f"lognormal claims need s > 0, got {self.s}")

    def survival(self, y):
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore"):
            z = (np.log(np.maximum(y, 0.0)) - self.m) / self.s
        return np.where(y <= 0, 1.0, stats.norm.sf(z))

    def moment(self, r):
        return math.exp(r * self.m + 0.5 * (r * self.s) ** 2)

    def partial_moment(self, r, lower=1.0):
        if lower <= 0:
            return self.moment(r)
        return self.moment(r) * float(stats.norm.cdf((self.m + r * self.s**2 - math.log(lower)) / self.s))

    def _integrate(self, theta, k, defect, kernel=None):
        # E[S^k g(theta S)] = E[S^k] * E[g(theta*exp(m + s(W + k s)))], W ~ N(0,1),
        # truncated at the 1e-14 tail quantile of W
        shift = self.m + k * self.s**2
        scale = self.moment(k) if k else 1.0

        def integrand(w, part):
            y = theta * math.exp(shift + self.s * w)
            if kernel is not None:
                v = kernel(y)
            else:
                v = -np.expm1(-y) if defect else np.exp(-y)
            v = v.real if part == 0 else v.imag
            return v * math.exp(-0.5 * w * w) / math.sqrt(2.0 * math.pi)

        out = []
        parts = (0, 1) if isinstance(theta, complex) else (0,)
        for part in parts:
            val, err = integrate.quad(
                integrand, -_LOGNORMAL_ZCUT, _LOGNORMAL_ZCUT, args=(part,),
                epsabs=0.0 if kernel else 1e-15, epsrel=_LOGNORMAL_RTOL, limit=400,
            )
            if err > max(_LOGNORMAL_RTOL * abs(val), 0.0 if kernel else 1e-14):
                raise QuadratureError("lognormal Laplace transform did not converge",
                                      theta=theta, k=k, value=val, error=err)
            out.append(val)
        res = complex(out[0], out[1]) if len(out) == 2 else out[0]
        return scale * res

    def laplace(self, theta, k=0):
        if theta == 0:
            return self.moment(k)
        return self._integrate(_scalar(theta), k, defect=False)

    def laplace_defect(self, theta):
        if theta == 0:
            return 0.0
        return self._integrate(_scalar(theta), 0, defect=True)

    # both kernels vanish like S^2 at 0, so integrate under the S^2-tilted
    # law; the truncation then cuts where the integrand actually lives
    def centered_laplace(self, theta):
        if theta == 0:
            return 0.0
        t = float(theta)
        # theta is factored out so the quadrature sees O(1) values
        return t * t * self._integrate(t, 2, False, kernel=_h2_over_sq)

    def centered_laplace1(self, theta):
        if theta == 0:
            return 0.0
        t = float(theta)
        return t * self._integrate(t, 2, False, kernel=_h1_over)

    def laplace_grid(self, beta):
        """Vectorised E[exp(-beta*S)] for complex beta with Re(beta) >= 0.

        Composite Gauss-Legendre on the same truncated normal range as the
        adaptive route; used by the inversion engine where many nodes are
        needed at once.
        """
        w, wt = _lognormal_nodes()
        beta = np.asarray(beta, dtype=complex)
        y = np.exp(self.m + self.s * w)
        vals = np.exp(-np.multiply.outer(beta, y))
        return vals @ wt

    def sample(self, rng, size):
        return rng.lognormal(self.m, self.s, size)

    def to_dict(self):
        return {"type": self.name, "m": self.m, "s": self.s}


@dataclass(frozen=True)
class Deterministic(ClaimDistribution):
    a: float
    name = "deterministic"

    def __post_init__(self):
        if not self.a > 0:
            raise ModelError(f"deterministic claims need a > 0, got {self.a}")

    def has_mass_above(self, level):
        return self.a >= level

    def survival(self, y):
        return np.where(np.asarray(y, dtype=float) < self.a, 1.0, 0.0)

    def moment(self, r):
        return self.a**r

    def partial_moment(self, r, lower=1.0):
        return self.a**r if self.a >= lower else 0.0

    def laplace(self, theta, k=0):
        return self.a**k * np.exp(-theta * self.a)

    def laplace_defect(self, theta):
        return -np.expm1(-theta * self.a)

    def centered_laplace(self, theta):
        return _h2(theta * self.a)

    def centered_laplace1(self, theta):
        return self.a * _h1(theta * self.a)

    def mean_exact(self):
        return Fraction(self.a)

    def sample(self, rng, size):
        return np.full(size, self.a)

    def breakpoints(self):
        return (self.a,)

    def to_dict(self):
        return {"type": self.name, "a": self.a}


@lru_cache(maxsize=1)
def _lognormal_nodes(panels=96, order=16):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(-_LOGNORMAL_ZCUT, _LOGNORMAL_ZCUT, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    weights = weights * np.exp(-0.5 * nodes**2) / math.sqrt(2.0 * math.pi)
    return nodes, weights


def _scalar(theta):
    if isinstance(theta, (complex, np.complexfloating)):
        return complex(theta)
    return float(theta)


def _from_mp(val, theta):
    if isinstance(theta, (complex, np.complexfloating)):
        return complex(val)
    return float(mpmath.re(val))


# ---------------------------------------------------------------------------
# jump families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CompoundPoisson:
    rate: float
    claim: ClaimDistribution

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ModelError(f"compound Poisson rate must be finite and > 0, got {self.rate}")

    @property
    def moment_order_sup(self) -> float:
        """sup{r : int_[1,inf) y^r Pi(dy) < inf}."""
        if not self.claim.has_mass_above(1.0):
            return math.inf
        return self.claim.moment_order_sup

    def exponent(self, theta):
        return -self.rate * self.claim.laplace_defect(theta)

    def exponent_derivative(self, theta, k):
        if theta == 0:
            m = self.claim.moment(k)
            return (-1) ** k * self.rate * m
        return (-1) ** k * self.rate * self.claim.laplace(theta, k)

    def mean_contribution(self):
        return -self.rate * self.claim.moment(1)

    def tail_moment(self, kappa):
        if not self.claim.has_mass_above(1.0):
            return 0.0
        if not self.claim.moment_finite(kappa):
            return math.inf
        return self.rate * self.claim.partial_moment(kappa, 1.0)

    def tail(self, y):
        return self.rate * self.claim.survival(y)

    def compensation(self):
        small = self.claim.moment(1) - self.claim.partial_moment(1, 1.0)
        return -self.rate * small

    def to_dict(self):
        return {"rate": self.rate, "claim": self.claim.to_dict()}


@dataclass(frozen=True)
class StableJumps:
    """Spectrally negative alpha-stable jumps with J(theta) = scale*theta**alpha."""

    alpha: float
    scale: float = 1.0

    def __post_init__(self):
        if not 1 < self.alpha < 2:
            raise ModelError(f"stable index must lie in (1, 2), got {self.alpha}")
        if not self.scale > 0:
            raise ModelError(f"stable scale must be > 0, got {self.scale}")

    @property
    def density_constant(self) -> float:
        """C in Pi(dy) = C*y**(-1-alpha) dy."""
        a = self.alpha
        return self.scale * a * (a - 1.0) / math.gamma(2.0 - a)

    @property
    def moment_order_sup(self):
        return self.alpha

    def exponent(self, theta):
        return self.scale * np.power(theta, self.alpha)

    def exponent_derivative(self, theta, k):
        falling = math.prod(self.alpha - j for j in range(k))
        if theta == 0:
            if k == 1:
                return 0.0
            return math.copysign(math.inf, falling)
        return self.scale * falling * theta ** (self.alpha - k)

    def mean_contribution(self):
        return 0.0

    def tail_moment(self, kappa):
        if kappa >= self.alpha:
            return math.inf
        return self.density_constant / (self.alpha - kappa)

    def tail(self, y):
        y = np.asarray(y, dtype=float)
        return self.density_constant * y ** (-self.alpha) / self.alpha

    def compensation(self):
        return self.density_constant / (self.alpha - 1.0)

    def to_dict(self):
        return {"alpha": self.alpha, "scale": self.scale}


JumpFamily = Union[CompoundPoisson, StableJumps, None]


class Regime(enum.Enum):
    DRIFTS_UP = "DriftsUp"
    OSCILLATES = "Oscillates"
    DRIFTS_DOWN = "DriftsDown"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class LevyModel:
    """Spectrally negative Lévy process with Gaussian part, drift and jumps.

    ``drift`` is the coefficient ``b`` of the uncompensated exponent
    ``psi(theta) = b*theta + gaussian_var/2*theta**2 + J(theta)``; for a
    Cramér-Lundberg model this is the premium rate ``p``.
    """

    gaussian_var: float = 0.0
    drift: float = 0.0
    jumps: JumpFamily = None

    def __post_init__(self):
        if not (self.gaussian_var >= 0 and math.isfinite(self.gaussian_var)):
            raise ModelError(f"gaussian_var must be finite and >= 0, got {self.gaussian_var}")
        if not math.isfinite(self.drift):
            raise ModelError(f"drift must be finite, got {self.drift}")
        if self.gaussian_var == 0 and self.jumps is None:
            raise ModelError("a pure drift is excluded: need gaussian_var > 0 or jumps")
        if self.gaussian_var == 0 and isinstance(self.jumps, CompoundPoisson) and self.drift <= 0:
            # psi would stay bounded: -X is a subordinator
            raise ModelError("compound Poisson model without Gaussian part needs drift p > 0")

    # convenience constructors ------------------------------------------------
    @classmethod
    def brownian(cls, p: float = 0.0, sigma2: float = 1.0) -> "LevyModel":
        return cls(gaussian_var=sigma2, drift=p)

    @classmethod
    def cramer_lundberg(cls, p: float, rate: float, claim: ClaimDistribution) -> "LevyModel":
        return cls(gaussian_var=0.0, drift=p, jumps=CompoundPoisson(rate, claim))

    @classmethod
    def jump_diffusion(cls, p, sigma2, rate, claim) -> "LevyModel":
        return cls(gaussian_var=sigma2, drift=p, jumps=CompoundPoisson(rate, claim))

    @classmethod
    def stable(cls, alpha: float, scale: float = 1.0, drift: float = 0.0,
               sigma2: float = 0.0) -> "LevyModel":
        return cls(gaussian_var=sigma2, drift=drift, jumps=StableJumps(alpha, scale))

    @property
    def kind(self) -> str:
        if self.jumps is None:
            return "brownian"
        if isinstance(self.jumps, StableJumps):
            return "stable"
        return "jump-diffusion" if self.gaussian_var > 0 else "cramer-lundberg"

    @property
    def claim(self) -> Optional[ClaimDistribution]:
        return self.jumps.claim if isinstance(self.jumps, CompoundPoisson) else None

    @property
    def bounded_variation(self) -> bool:
        return self.gaussian_var == 0 and isinstance(self.jumps, CompoundPoisson)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "gaussian_var": self.gaussian_var, "drift": self.drift}
        if self.jumps is not None:
            d["jumps"] = self.jumps.to_dict()
        return d

    @property
    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def __str__(self):
        return f"{self.kind}({self.to_dict()})"


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def _check_theta(theta):
    if not theta >= 0:
        raise DomainError(f"theta must be >= 0, got {theta}")


def laplace_exponent(model: LevyModel, theta: float) -> float:
    """psi(theta) for real theta >= 0.

    Compound Poisson parts are written as
    mean*theta + lam*E[exp(-theta*S) - 1 + theta*S], both terms nonnegative
    unless the process drifts down, so small theta loses no digits.
    """
    _check_theta(theta)
    theta = float(theta)
    if theta == 0:
        return 0.0
    jumps = model.jumps
    quad = 0.5 * model.gaussian_var * theta * theta
    if isinstance(jumps, CompoundPoisson):
        return _float_mean(model) * theta + quad + jumps.rate * jumps.claim.centered_laplace(theta)
    val = model.drift * theta + quad
    if jumps is not None:
        val += float(np.real(jumps.exponent(theta)))
    return val


def _float_mean(model: LevyModel) -> float:
    # exactly zero for oscillating models, whatever the float rounding says
    if _mean_sign(model) == 0:
        return 0.0
    return mean(model)


def laplace_exponent_complex(model: LevyModel, beta):
    """psi on complex arguments with Re(beta) > 0, vectorised where possible.

    Used by the Laplace inversion engine; families without closed transforms
    fall back to elementwise evaluation.
    """
    beta = np.asarray(beta, dtype=complex)
    val = model.drift * beta + 0.5 * model.gaussian_var * beta * beta
    jumps = model.jumps
    if jumps is None:
        return val
    if isinstance(jumps, StableJumps) or isinstance(jumps.claim, (Exponential, Deterministic)):
        return val + jumps.exponent(beta)
    if isinstance(jumps.claim, LogNormal):
        return val + jumps.rate * (jumps.claim.laplace_grid(beta) - 1.0)
    flat = np.array([jumps.exponent(complex(b)) for b in beta.ravel()], dtype=complex)
    return val + flat.reshape(beta.shape)


def laplace_exponent_derivative(model: LevyModel, theta: float, k: int) -> float:
    """k-th derivative of psi at theta; theta == 0 means the right limit 0+.

    At 0+ the value may be +/-inf when the jump measure lacks the k-th moment.
    """
    if k < 1 or int(k) != k:
        raise DomainError(f"k must be a positive integer, got {k}")
    _check_theta(theta)
    k = int(k)
    theta = float(theta)
    if k == 1 and theta == 0:
        return mean(model)
    poly = 0.0
    if k == 1:
        poly = model.drift + model.gaussian_var * theta
    elif k == 2:
        poly = model.gaussian_var
    if model.jumps is None:
        return poly
    if isinstance(model.jumps, CompoundPoisson):
        if theta == 0 and not model.jumps.claim.moment_finite(k):
            return (-1) ** k * math.inf
        if k == 1:
            # mean + sigma2*theta + lam*E[S(1 - exp(-theta*S))]
            return (_float_mean(model) + model.gaussian_var * theta
                    + model.jumps.rate * model.jumps.claim.centered_laplace1(theta))
    return poly + float(np.real(model.jumps.exponent_derivative(theta, k)))


def jump_moment_finite(model: LevyModel, kappa: float) -> bool:
    """Symbolic finiteness of int_[1,inf) y^kappa Pi(dy)."""
    if model.jumps is None:
        return True
    return kappa < model.jumps.moment_order_sup


def jump_moment(model: LevyModel, kappa: float) -> float:
    """int_[1,inf) y**kappa Pi(dy); +inf decided from the family parameters."""
    if not kappa > 0:
        raise DomainError(f"kappa must be > 0, got {kappa}")
    if model.jumps is None:
        return 0.0
    if not jump_moment_finite(model, kappa):
        return math.inf
    return float(model.jumps.tail_moment(kappa))


def mean(model: LevyModel) -> float:
    """E[X_1] = psi'(0+); -inf when the jump mean diverges."""
    if model.jumps is None:
        return float(model.drift)
    return float(model.drift + model.jumps.mean_contribution())


def _mean_sign(model: LevyModel) -> int:
    """Sign of psi'(0+) decided in exact arithmetic on the parameters."""
    jumps = model.jumps
    if jumps is None or isinstance(jumps, StableJumps):
        exact = Fraction(model.drift)
        return (exact > 0) - (exact < 0)
    claim = jumps.claim
    ex = claim.mean_exact()
    if ex is not None:
        exact = Fraction(model.drift) - Fraction(jumps.rate) * ex
        return (exact > 0) - (exact < 0)
    # lognormal: exp(m + s^2/2) is transcendental, compare at high precision
    with mpmath.workdps(60):
        diff = mpmath.mpf(model.drift) - mpmath.mpf(jumps.rate) * mpmath.exp(
            mpmath.mpf(claim.m) + mpmath.mpf(claim.s) ** 2 / 2)
    return (diff > 0) - (diff < 0)


def regime(model: LevyModel) -> Regime:
    sign = _mean_sign(model)
    if sign > 0:
        return Regime.DRIFTS_UP
    if sign < 0:
        return Regime.DRIFTS_DOWN
    return Regime.OSCILLATES


def compensated_drift(model: LevyModel) -> float:
    """The drift c of the form compensating jumps below 1.

    psi(theta) = c*theta + sigma2/2*theta^2
                 + int (exp(-theta*y) - 1 + theta*y*1{y<1}) Pi(dy).
    """
    if model.jumps is None:
        return float(model.drift)
    return float(model.drift + model.jumps.compensation())


def levy_tail(model: LevyModel, y):
    """Pi((y, inf)) for y > 0."""
    if model.jumps is None:
        return np.zeros_like(np.asarray(y, dtype=float))
    return model.jumps.tail(y)
