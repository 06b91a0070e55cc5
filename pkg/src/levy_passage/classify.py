"""Which passage-time moments exist, decided from the model parameters.

The decision uses only the regime (sign of psi'(0+), decided exactly), the
moment index of the jump measure and, for two special families, known sharp
thresholds.  Nothing here is numerical except the exponential-moment
abscissa for models without a closed form.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Optional

from .errors import DomainError
from .inverse import InverseExponent
from .model import CompoundPoisson, LevyModel, Regime, StableJumps, laplace_exponent, regime

__all__ = ["Verdict", "MomentVerdict", "classify_moment", "exponential_moment_abscissa"]

# relative slack when kappa is compared against a threshold given in floats
# (1 - 1/1.5 rounds below 1/3, which must still count as the boundary)
_REL_TOL = 1e-12


class Verdict(enum.Enum):
    FINITE = "Finite"
    INFINITE = "Infinite"
    UNKNOWN = "Unknown"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class MomentVerdict:
    verdict: Verdict
    clause: str
    detail: str
    threshold: Optional[float] = None

    @property
    def finite(self) -> Optional[bool]:
        if self.verdict is Verdict.UNKNOWN:
            return None
        return self.verdict is Verdict.FINITE

    def to_dict(self) -> dict:
        thr = self.threshold
        if thr is not None and math.isinf(thr):
            thr = "inf"
        return {"verdict": str(self.verdict), "clause": self.clause,
                "threshold": thr, "detail": self.detail}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _geq(a: float, b: float) -> bool:
    return a >= b - _REL_TOL * max(1.0, abs(b))


def _lt(a: float, b: float) -> bool:
    return not _geq(a, b)


def _jump_index(model: LevyModel) -> float:
    """sup{r : int_[1,inf) y^r Pi(dy) < inf}."""
    if model.jumps is None:
        return math.inf
    return model.jumps.moment_order_sup


def _check_x(model: LevyModel, x: float):
    if not x >= 0:
        raise DomainError(f"x must be >= 0, got {x}")
    if x == 0 and not model.bounded_variation:
        raise DomainError("x = 0 is excluded for processes of unbounded variation")


def classify_moment(model: LevyModel, kappa: float, x: float = 1.0) -> MomentVerdict:
    """Finite / Infinite / Unknown verdict for E[(tau_x)^kappa | tau_x < inf]."""
    if not kappa > 0:
        raise DomainError(f"kappa must be > 0, got {kappa}")
    _check_x(model, x)
    reg = regime(model)
    index = _jump_index(model)

    if reg is Regime.DRIFTS_DOWN:
        return MomentVerdict(Verdict.FINITE, "Thm 3.1(i)",
                             "process drifts to -inf: tau_x has exponential moments",
                             math.inf)

    if reg is Regime.DRIFTS_UP:
        threshold = index - 1.0
        if _lt(kappa + 1.0, index):
            return MomentVerdict(Verdict.FINITE, "Thm 3.1(ii)",
                                 f"jump moment of order {kappa + 1:g} is finite", threshold)
        return MomentVerdict(Verdict.INFINITE, "Thm 3.1(ii)",
                             f"jump moment of order {kappa + 1:g} is infinite "
                             f"(finite only below {index:g})", threshold)

    # oscillating
    special = _special_threshold(model)
    if _geq(kappa, 1.0):
        return MomentVerdict(Verdict.INFINITE, "Thm 3.1(iii)",
                             "oscillating process: no moment of order >= 1", special)
    second_finite = index > 2.0
    if second_finite and kappa > 0.5 and not _geq(0.5, kappa):
        return MomentVerdict(Verdict.INFINITE, "Thm 3.1(iii)(b)",
                             "psi''(0+) < inf and kappa > 1/2", special)
    kappa_star = max(0.0, index - 1.0)
    if 0 < kappa_star <= 1.0 and _geq(kappa, kappa_star):
        return MomentVerdict(Verdict.INFINITE, "Thm 3.1(iii)(a)",
                             f"jump moment of order {kappa_star + 1:g} is infinite and "
                             f"kappa >= {kappa_star:g}", special)
    if special is not None:
        clause = "Remark(i)" if model.jumps is None else "Remark(ii)"
        if _lt(kappa, special):
            return MomentVerdict(Verdict.FINITE, clause,
                                 f"finite exactly for kappa < {special:g}", special)
        return MomentVerdict(Verdict.INFINITE, clause,
                             f"finite exactly for kappa < {special:g}", special)
    return MomentVerdict(Verdict.UNKNOWN, "open",
                         "oscillating process below every known divergence bound", None)


def _special_threshold(model: LevyModel) -> Optional[float]:
    """Sharp threshold for driftless Brownian motion and pure stable processes."""
    if model.drift != 0:
        return None
    if model.jumps is None:
        return 0.5
    if isinstance(model.jumps, StableJumps) and model.gaussian_var == 0:
        return 1.0 - 1.0 / model.jumps.alpha
    return None


def exponential_moment_abscissa(model: LevyModel) -> float:
    """sup{q : E[exp(q*tau_x)] < inf} = -min psi for a process drifting down."""
    if regime(model) is not Regime.DRIFTS_DOWN:
        raise DomainError("exponential moments of tau_x need psi'(0+) < 0")
    if model.jumps is None:
        # psi(theta) = p*theta + s2/2*theta^2 is minimal at -p/s2
        return model.drift**2 / (2.0 * model.gaussian_var)
    inv = InverseExponent(model)
    return -laplace_exponent(model, inv.theta_min)
