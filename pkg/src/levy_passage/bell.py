"""Partial Bell polynomials with exact integer coefficients."""
from __future__ import annotations

import math
from functools import lru_cache

MAX_ORDER = 10


@lru_cache(maxsize=None)
def partial_bell_coefficients(n: int, k: int) -> dict:
    """Monomials of B_{n,k}(x_1, ..., x_{n-k+1}).

    Returns ``{exponents: coefficient}`` where ``exponents[i]`` is the power
    of ``x_{i+1}``; tuples have length ``n`` and coefficients are ints.
    Built from B_{n,k} = sum_i C(n-1, i-1) x_i B_{n-i,k-1}.
    """
    if n < 0 or k < 0:
        raise ValueError("n and k must be nonnegative")
    if n > MAX_ORDER:
        raise ValueError(f"Bell polynomials supported up to order {MAX_ORDER}, got {n}")
    if n == 0 and k == 0:
        return {(): 1}
    if n == 0 or k == 0 or k > n:
        return {}
    out: dict = {}
    for i in range(1, n - k + 2):
        c = math.comb(n - 1, i - 1)
        for mono, coef in partial_bell_coefficients(n - i, k - 1).items():
            exps = list(mono) + [0] * (n - len(mono))
            exps[i - 1] += 1
            key = tuple(exps)
            out[key] = out.get(key, 0) + c * coef
    return out


def partial_bell(n: int, k: int, xs) -> float:
    """Evaluate B_{n,k} at ``xs = (x_1, x_2, ...)``."""
    total = 0.0
    for mono, coef in partial_bell_coefficients(n, k).items():
        term = float(coef)
        for x, e in zip(xs, mono):
            if e:
                term *= x**e
        total += term
    return total
