"""Named invariant checks over a fixed matrix of models.

``levy-passage verify <suite>`` runs one of these; the test-suite reuses the
model matrix and the finite-difference helper.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List

import numpy as np

from .inverse import InverseExponent
from .model import (
    Deterministic,
    Exponential,
    LevyModel,
    LogNormal,
    Pareto,
    Regime,
    laplace_exponent,
    regime,
)

__all__ = ["standard_models", "richardson_derivative", "CheckResult", "SUITES", "run_suite"]


def standard_models() -> Dict[str, LevyModel]:
    """One or more models per family, covering all three regimes."""
    return {
        "brownian-up": LevyModel.brownian(1.0, 1.0),
        "brownian-osc": LevyModel.brownian(0.0, 1.0),
        "brownian-down": LevyModel.brownian(-1.0, 1.0),
        "cl-exp-up": LevyModel.cramer_lundberg(2.0, 1.0, Exponential(1.0)),
        "cl-exp-osc": LevyModel.cramer_lundberg(1.0, 1.0, Exponential(1.0)),
        "cl-exp-down": LevyModel.cramer_lundberg(1.0, 1.0, Exponential(0.5)),
        "cl-pareto-up": LevyModel.cramer_lundberg(2.0, 1.0, Pareto(2.5, 0.6)),
        "cl-lognormal-up": LevyModel.cramer_lundberg(2.0, 1.0, LogNormal(-0.5, 1.0)),
        "cl-det-up": LevyModel.cramer_lundberg(2.0, 1.0, Deterministic(1.5)),
        "jd-exp-up": LevyModel.jump_diffusion(1.0, 0.5, 1.0, Exponential(2.0)),
        "jd-exp-down": LevyModel.jump_diffusion(0.2, 0.5, 1.0, Exponential(2.0)),
        "stable-osc": LevyModel.stable(1.5),
        "stable-up": LevyModel.stable(1.5, drift=1.0),
    }


def richardson_derivative(f: Callable[[float], float], x: float, n: int, h: float) -> float:
    """n-th derivative by central differences at h and h/2, one Richardson step.

    The central stencil has error c*h^2 + O(h^4); combining two steps removes
    the h^2 term.
    """
    def central(step):
        total = 0.0
        for k in range(n + 1):
            total += (-1) ** k * math.comb(n, k) * f(x + (n / 2 - k) * step)
        return total / step**n

    d1, d2 = central(h), central(h / 2)
    return d2 + (d2 - d1) / 3.0


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def suite_roundtrip() -> List[CheckResult]:
    out = []
    grid = np.linspace(0.0, 100.0, 50)
    for name, model in standard_models().items():
        inv = InverseExponent(model)
        worst = 0.0
        for q in grid:
            th = inv.phi(q)
            val = laplace_exponent(model, th)
            worst = max(worst, abs(val) if q == 0 else _rel(val, q))
        out.append(CheckResult(f"roundtrip[{name}]", worst <= 1e-10, f"max rel err {worst:.2e}"))
    return out


def suite_conjugacy() -> List[CheckResult]:
    out = []
    for name, model in standard_models().items():
        if regime(model) is Regime.DRIFTS_DOWN:
            continue
        inv = InverseExponent(model)
        worst = 0.0
        for th in (0.05, 0.3, 1.0, 3.0, 10.0):
            worst = max(worst, _rel(th * inv.conjugate_exponent(th), laplace_exponent(model, th)))
        for q in (0.1, 1.0, 5.0):
            worst = max(worst, _rel(inv.conjugate_exponent(inv.phi(q)), inv.eta(q)))
        out.append(CheckResult(f"conjugacy[{name}]", worst <= 1e-8, f"max rel err {worst:.2e}"))
    return out


def suite_bell() -> List[CheckResult]:
    out = []
    models = standard_models()
    for name in ("brownian-up", "cl-exp-up"):
        inv = InverseExponent(models[name])
        worst = 0.0
        for q in (0.25, 1.0, 4.0):
            for n in (2, 3, 4):
                exact = inv.phi_derivative(q, n)
                fd = richardson_derivative(inv.phi, q, n, h=0.05 * min(q, 1.0))
                worst = max(worst, _rel(fd, exact))
        out.append(CheckResult(f"bell[{name}]", worst <= 1e-5, f"max rel err {worst:.2e}"))
    return out


def suite_scale() -> List[CheckResult]:
    from .scale import ScaleEvaluator

    out = []
    for name, model in standard_models().items():
        ev = ScaleEvaluator(model)
        ok = ev.W(1.0, -1.0) == 0.0 and ev.Z(1.0, -1.0) == 1.0
        vals = [ev.passage_lt(q, 1.0) for q in (0.0, 0.5, 2.0, 8.0)]
        ok = ok and all(0.0 <= v <= 1.0 for v in vals)
        ok = ok and all(a >= b for a, b in zip(vals, vals[1:]))
        out.append(CheckResult(f"scale[{name}]", bool(ok),
                               "W(-1)=0, Z(-1)=1, passage LT in [0,1] and decreasing in q"))
    return out


SUITES: Dict[str, Callable[[], List[CheckResult]]] = {
    "roundtrip": suite_roundtrip,
    "conjugacy": suite_conjugacy,
    "bell": suite_bell,
    "scale": suite_scale,
}


def run_suite(name: str) -> List[CheckResult]:
    if name == "all":
        return [r for fn in SUITES.values() for r in fn()]
    return SUITES[name]()
