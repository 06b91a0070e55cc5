"""Fractional moments of passage times from their Laplace transforms.

For a nonnegative (possibly defective) variable T with transform
g(z) = E[exp(-z*T); T < inf] and 0 < kappa < 1,

    E[T^kappa; T < inf] = kappa/Gamma(1-kappa) * int_0^inf (g(0) - g(u)) u^(-kappa-1) du,

which is the Marchaud derivative of g at 0.  Orders kappa >= 1 are reduced to
the fractional part by n-th differences: with n = floor(kappa),

    g_eps(z) = sum_j (-1)^j C(n, j) g(z + j*eps) = E[exp(-zT) (1 - exp(-eps*T))^n]

is again a Laplace transform and D^(kappa-n) g_eps(0) / eps^n increases to
E[T^kappa] as eps -> 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate

from .errors import DomainError, QuadratureError, UnstableError, UnsupportedInputError
from .inverse import InverseExponent
from .model import Regime
from .scale import ScaleEvaluator

__all__ = [
    "MarchaudConfig",
    "marchaud",
    "moment_from_laplace",
    "passage_moment",
    "upward_passage_moment",
]


@dataclass(frozen=True)
class MarchaudConfig:
    """Truncation and divergence policy for Marchaud integrals.

    upper_cut, divergence_threshold, rtol and eps_ladder follow the usual
    meaning.  ``noise`` is the absolute accuracy of the function values;
    it decides how close to the base point differences can be trusted.
    ``ladder_rtol`` bounds the spread of extrapolated values across the eps
    ladder before :class:`UnstableError` is raised.
    """

    upper_cut: float = 1e6
    divergence_threshold: float = 1e12
    rtol: float = 1e-8
    eps_ladder: tuple = (1e-2, 1e-3, 1e-4)
    noise: float = 1e-15
    ladder_rtol: float = 1e-3
    max_upper_cut: float = 1e9
    # smallest accepted gap between the local exponent of f(z) - f(z+v) at
    # v -> 0 and kappa; the measured uncertainty of the exponent widens it
    exponent_margin: float = 0.002
    # eps-ladder increments must shrink at least at this rate to count as convergent
    rate_margin: float = 0.02

    def __post_init__(self):
        if not self.upper_cut > 1:
            raise DomainError("upper_cut must exceed 1")
        if not self.divergence_threshold > 0:
            raise DomainError("divergence_threshold must be positive")
        eps = tuple(self.eps_ladder)
        if len(eps) < 2 or any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
            raise DomainError("eps_ladder must be strictly decreasing and positive")
        if not self.noise >= 0:
            raise DomainError("noise must be nonnegative")


_DEFAULT = MarchaudConfig()
# ladder points with d(v) below this multiple of the noise are ignored
_WEAK_SIGNAL = 1e3
_TOP_DECADE = 3
_LADDER_DECADES = 17


def _check_kappa(kappa, lo, hi):
    if not (lo < kappa < hi):
        raise DomainError(f"kappa must lie in ({lo}, {hi}), got {kappa}")


def _lower_cut(d, noise):
    """Pick the base of the power-law lower tail of d(v) = f(z) - f(z+v).

    Walks down the ladder v = 10^k while d stays above the noise and forms
    local exponents gamma_k = log10(d(10v)/d(v)).  Each carries an error from
    noise in d and from its drift against the next decade up; the pair with
    the smallest error wins.  Returns (v, d(v), gamma, error) or None when d
    never leaves the noise.
    """
    noise = max(noise, 1e-300)
    thr = _WEAK_SIGNAL * noise
    ladder = []
    for k in range(_TOP_DECADE, -_LADDER_DECADES - 1, -1):
        v = 10.0**k
        dv = d(v)
        if dv < thr:
            break
        ladder.append((v, dv))
    if len(ladder) < 2:
        return None
    best = None
    # ladder runs from large to small v; pair i is (ladder[i+1], ladder[i])
    for i in range(len(ladder) - 1):
        (v, dv), (_, d10) = ladder[i + 1], ladder[i]
        if d10 > 0.1 * ladder[0][1]:
            # still near saturation, not in the small-v regime
            continue
        gamma = math.log10(max(d10, dv) / dv)
        if i > 0:
            d100 = ladder[i - 1][1]
            drift = abs(gamma - math.log10(max(d100, d10) / d10))
        else:
            drift = 1.0
        err = drift + 2.0 * noise / (dv * math.log(10))
        if best is None or err <= best[3]:
            best = (v, dv, gamma, err)
    if best is None:
        v, dv = ladder[-1]
        best = (v, dv, math.log10(ladder[-2][1] / dv), 1.0)
    return best


def marchaud(f, kappa: float, z: float = 0.0, cfg: MarchaudConfig = _DEFAULT) -> float:
    """Marchaud derivative of order kappa in (0, 1) of a nonincreasing f at z.

    Returns ``math.inf`` when the integral diverges at the base point or
    exceeds ``cfg.divergence_threshold``.
    """
    _check_kappa(kappa, 0.0, 1.0)
    if not z >= 0:
        raise DomainError(f"z must be >= 0, got {z}")
    f = f if isinstance(f, _Cached) else _Cached(f)
    f0 = float(f(z))
    noise = cfg.noise + 1e-16 * abs(f0)
    slack = 1e3 * noise + 1e-9 * abs(f0)

    def d(v):
        val = f0 - float(f(z + v))
        if val < -slack:
            raise UnsupportedInputError(
                f"function increases after the base point (f(z) - f(z+{v:g}) = {val:g})")
        return val

    cut = _lower_cut(d, noise)
    # the decade points are cached by now; d must not decrease along them
    prev = 0.0
    for k in range(-_LADDER_DECADES, _TOP_DECADE + 1):
        dv = d(10.0**k)
        if dv < prev - slack:
            raise UnsupportedInputError(f"function is not nonincreasing near z + 1e{k}")
        prev = max(prev, dv)
    const = kappa / math.gamma(1.0 - kappa)
    U = cfg.upper_cut
    if cut is None:
        # differences never rise above noise: f is flat up to the cut
        return 0.0
    vmin, dmin, gamma, spread = cut
    if gamma - kappa <= max(cfg.exponent_margin, 3.0 * spread):
        return math.inf
    lower = dmin * vmin ** (-kappa) / (gamma - kappa)

    # log-space quadrature of d(v) v^(-kappa) ds, v = e^s
    g = lambda s: d(math.exp(s)) * math.exp(-kappa * s)
    start = math.log(vmin)
    middle = 0.0
    a = start
    while True:
        b = math.log(U)
        if b > a:
            pts = np.arange(math.ceil(a / math.log(10)), b / math.log(10)) * math.log(10)
            pts = [p for p in pts if a < p < b]
            val, err = integrate.quad(g, a, b, points=pts or None, epsabs=0.0,
                                      epsrel=cfg.rtol, limit=400)
            # noisy values cap the attainable accuracy near the lower cut
            floor = 100 * noise * vmin ** (-kappa) / kappa
            if not math.isfinite(val) or err > max(10 * cfg.rtol * abs(val), floor, 1e-14):
                raise QuadratureError("Marchaud integral did not converge", kappa=kappa, z=z,
                                      value=val, error=err)
            middle += val
            a = b
        total = lower + middle
        if const * total > cfg.divergence_threshold:
            return math.inf
        fU = float(f(z + U))
        # int_U^inf d(v) v^(-kappa-1) dv lies between (f0 - fU) U^-k/k and f0 U^-k/k
        tail = (f0 - 0.5 * fU) * U ** (-kappa) / kappa
        spread = 0.5 * max(fU, 0.0) * U ** (-kappa) / kappa
        if spread <= cfg.rtol * (total + tail) or U >= cfg.max_upper_cut:
            break
        U = min(2.0 * U, cfg.max_upper_cut)
    result = const * (total + tail)
    if result > cfg.divergence_threshold:
        return math.inf
    return result


class _Cached:
    """Memoise a scalar function; the eps ladder revisits the same points."""

    def __init__(self, f):
        self.f = f
        self.memo = {}

    def __call__(self, u):
        u = float(u)
        if u not in self.memo:
            self.memo[u] = float(self.f(u))
        return self.memo[u]


def _difference(g, n, eps):
    coef = [(-1) ** j * math.comb(n, j) for j in range(n + 1)]
    return lambda z: sum(c * g(z + j * eps) for j, c in enumerate(coef))


def _usable_ladder(g, n, cfg):
    """Steps from cfg.eps_ladder whose n-th differences stand clear of the noise.

    When fewer than three survive, the ladder is refilled downwards from
    the largest step in half-decade steps.
    """
    need = 1e4 * cfg.noise * 2**n
    usable = lambda e: _difference(g, n, e)(0.0) >= need
    ladder = [e for e in cfg.eps_ladder if usable(e)]
    if len(ladder) >= 3:
        return ladder
    eps = cfg.eps_ladder[0]
    ladder = []
    while len(ladder) < 3 and eps >= 1e-8:
        if usable(eps):
            ladder.append(eps)
        eps /= math.sqrt(10.0)
    if len(ladder) < 2:
        raise UnstableError("finite differences drown in noise for every step",
                            order=n, noise=cfg.noise)
    return ladder


def moment_from_laplace(g, kappa: float, cfg: MarchaudConfig = _DEFAULT) -> float:
    """E[T^kappa; T < inf] from the Laplace transform g of T."""
    if not kappa > 0:
        raise DomainError(f"kappa must be > 0, got {kappa}")
    g = _Cached(g)
    if kappa < 1:
        return marchaud(g, kappa, 0.0, cfg)
    n = int(math.floor(kappa))
    frac = kappa - n
    ladder = _usable_ladder(g, n, cfg)
    cfg = replace(cfg, eps_ladder=tuple(ladder))
    values = []
    for eps in ladder:
        ge = _difference(g, n, eps)
        if frac == 0:
            raw = ge(0.0)
        else:
            sub = replace(cfg, noise=cfg.noise * 2**n)
            raw = marchaud(ge, frac, 0.0, sub)
        if math.isinf(raw):
            return math.inf
        values.append(raw / eps**n)
    return _extrapolate(values, cfg, n)


def _neville_at_zero(xs, ys):
    """Value at 0 of the polynomial through (xs, ys)."""
    p = list(ys)
    for k in range(1, len(xs)):
        for i in range(len(xs) - k):
            p[i] = (xs[i + k] * p[i] - xs[i] * p[i + 1]) / (xs[i + k] - xs[i])
    return p[0]


def _extrapolate(values, cfg, n):
    """Limit of the increasing sequence Q(eps_k) along the eps ladder.

    Smooth laws have Q(eps) = E[T^kappa] + a*eps + b*eps^2 + ..., handled by
    polynomial extrapolation.  Heavy tails give increments shrinking like
    eps^r with r < 1; the rate is fitted and the geometric remainder added.
    Increments that stop shrinking mean the limit is infinite.
    """
    eps = list(cfg.eps_ladder)[-len(values):]
    noise = 10 * cfg.noise * 2**n / eps[-1] ** n + 1e-12 * abs(values[-1])
    d2 = values[-1] - values[-2]
    if abs(d2) <= noise:
        return values[-1]
    if d2 < 0:
        raise UnstableError("difference quotients decrease along the eps ladder",
                            values=tuple(values))
    ratio = eps[-2] / eps[-1]
    richardson = values[-1] + d2 / (ratio - 1.0)
    if len(values) < 3:
        return richardson
    d1 = values[-2] - values[-3]
    if d1 <= 0:
        raise UnstableError("difference quotients are not monotone along the eps ladder",
                            values=tuple(values))
    rate = math.log(d1 / d2) / math.log(eps[-3] / eps[-2])
    if rate <= cfg.rate_margin:
        # increments no longer shrink: the limit is infinite
        return math.inf
    if 0.8 <= rate <= 1.25:
        value = _neville_at_zero(eps, values)
    else:
        rho = ratio ** (-rate)
        value = values[-1] + d2 * rho / (1.0 - rho)
    # the two-point estimate at the finest steps must roughly agree
    limit = 10 * cfg.ladder_rtol * abs(value) + noise
    if abs(value - richardson) > limit and not (rate < 0.8 and value > richardson):
        raise UnstableError("extrapolation along the eps ladder is unreliable",
                            values=tuple(values), rate=rate)
    return value


def passage_moment(ev: ScaleEvaluator, x: float, kappa: float,
                   cfg: MarchaudConfig = _DEFAULT) -> float:
    """E[(tau_x)^kappa | tau_x < inf] for the downward passage time below -x."""
    if not kappa > 0:
        raise DomainError(f"kappa must be > 0, got {kappa}")
    ev._check_x(x)
    ruin = ev.ruin_probability(x)
    if ruin <= 0:
        raise DomainError(f"passage below -{x} has probability zero")
    cfg = replace(cfg, noise=max(cfg.noise, ev.accuracy))
    g = lambda q: ev.passage_lt(q, x)
    return moment_from_laplace(g, kappa, cfg) / ruin


def upward_passage_moment(inv: InverseExponent, kappa: float,
                          cfg: MarchaudConfig = _DEFAULT) -> float:
    """E[(tau_1^+)^kappa] from E[exp(-q tau_1^+)] = exp(-Phi(q)), kappa in (0, 1)."""
    _check_kappa(kappa, 0.0, 1.0)
    if inv.regime is Regime.DRIFTS_DOWN:
        raise DomainError("upward passage moments need psi'(0+) >= 0")
    cfg = replace(cfg, noise=max(cfg.noise, 1e-14))
    return marchaud(lambda u: math.exp(-inv.phi(u)), kappa, 0.0, cfg)
