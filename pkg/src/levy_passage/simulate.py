"""Monte Carlo sampling of the downward passage time tau_x.

Streams
-------
Paths are cut into blocks of ``SimConfig.block_size``.  Block ``b`` draws
from ``numpy.random.Generator(Philox(key=[seed, b]))``: the 128-bit Philox-4x64
key is the pair (seed, block index) as two unsigned 64-bit words, counter
starting at zero.  Blocks are merged in block order, so the output does not
depend on how many threads produced it.

Within a block, paths are only ever removed from the working arrays when
they pass below the barrier, never when they reach ``t_max``.  The draws a
path receives up to time ``t_max`` therefore do not depend on ``t_max``,
and raising ``t_max`` can only turn censored paths into passages.
"""
from __future__ import annotations

import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import DomainError, UnsupportedInputError
from .model import CompoundPoisson, LevyModel, StableJumps

__all__ = [
    "SimConfig",
    "PassageSampleSet",
    "MomentEstimate",
    "sample_passage_times",
    "empirical_moment",
    "tail_index",
    "empirical_laplace",
    "empirical_exponential_moment",
    "block_generator",
    "thread_cap",
]

THREADS_ENV = "LEVY_PASSAGE_THREADS"
# two float64 columns per path, plus working arrays of about the same size
MEMORY_BUDGET_BYTES = 4 * 2**30
_BYTES_PER_PATH = 64
_CL_CHUNK = 16  # claim epochs drawn per path and sweep


@dataclass(frozen=True)
class SimConfig:
    n_paths: int
    seed: int = 0
    t_max: float = 1e4
    diffusion_step: float = 1e-3
    workers: int = 1
    block_size: int = 8192
    bias_check: bool = True  # jump-diffusion only: rerun at half the step

    def __post_init__(self):
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise DomainError(f"n_paths must be a positive integer, got {self.n_paths}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if not (self.t_max > 0):
            raise DomainError(f"t_max must be > 0, got {self.t_max}")
        if not (self.diffusion_step > 0):
            raise DomainError(f"diffusion_step must be > 0, got {self.diffusion_step}")
        if int(self.workers) != self.workers or self.workers < 1:
            raise DomainError(f"workers must be a positive integer, got {self.workers}")
        if int(self.block_size) != self.block_size or self.block_size < 1:
            raise DomainError(f"block_size must be a positive integer, got {self.block_size}")
        if self.n_paths * _BYTES_PER_PATH > MEMORY_BUDGET_BYTES:
            raise DomainError(f"n_paths={self.n_paths} exceeds the memory budget of "
                              f"{MEMORY_BUDGET_BYTES // 2**30} GiB")


@dataclass
class PassageSampleSet:
    """Finite passage times in path order, plus the censoring count."""

    finite_times: np.ndarray
    censored_count: int
    x: float
    model_digest: str
    seed: int
    n_paths: int
    t_max: float
    method: str
    undershoots: Optional[np.ndarray] = None
    approximate: bool = False
    metadata: dict = field(default_factory=dict)

    @property
    def n_finite(self) -> int:
        return int(self.finite_times.size)

    @property
    def censored_fraction(self) -> float:
        return self.censored_count / self.n_paths

    def header(self) -> dict:
        h = {
            "model_digest": self.model_digest,
            "x": repr(float(self.x)),
            "seed": str(self.seed),
            "n_paths": str(self.n_paths),
            "n_finite": str(self.n_finite),
            "censored_count": str(self.censored_count),
            "t_max": repr(float(self.t_max)),
            "method": self.method,
            "approximate": str(self.approximate).lower(),
        }
        for k, v in sorted(self.metadata.items()):
            h[k] = repr(v) if isinstance(v, float) else str(v)
        return h

    def to_csv(self, path: Union[str, Path, None] = None) -> str:
        """``# key: value`` header rows, then a ``tau,undershoot`` table.

        The undershoot below the barrier is empty where the process creeps.
        """
        buf = io.StringIO()
        for k, v in self.header().items():
            buf.write(f"# {k}: {v}\n")
        buf.write("tau,undershoot\n")
        u = self.undershoots
        for i, t in enumerate(self.finite_times.tolist()):
            us = "" if u is None else repr(float(u[i]))
            buf.write(f"{t!r},{us}\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    def summary(self) -> dict:
        """Counts, quantiles, a few moments and the tail index, JSON-ready."""
        out = {k: v for k, v in self.header().items()}
        out["censored_fraction"] = self.censored_fraction
        t = self.finite_times
        if t.size:
            qs = np.quantile(t, [0.1, 0.25, 0.5, 0.75, 0.9])
            out["quantiles"] = dict(zip(["0.1", "0.25", "0.5", "0.75", "0.9"], qs.tolist()))
        if t.size >= 2:
            out["moments"] = {}
            for k in (0.25, 0.5, 1.0):
                m = empirical_moment(self, k)
                out["moments"][str(k)] = m.to_dict()
        if t.size >= 100 and np.all(t > 0):
            out["tail_index"] = tail_index(self)
        return out

    def to_json(self, path: Union[str, Path, None] = None) -> str:
        text = json.dumps(self.summary(), indent=2, sort_keys=True)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text


# ---------------------------------------------------------------------------
# streams and threads
# ---------------------------------------------------------------------------

def block_generator(seed: int, block: int) -> np.random.Generator:
    key = np.array([seed, block], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def thread_cap(requested: int) -> int:
    """Worker count after applying the LEVY_PASSAGE_THREADS cap."""
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise DomainError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
        if cap < 1:
            raise DomainError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
        return min(requested, cap)
    return requested


# ---------------------------------------------------------------------------
# samplers; each returns (times, undershoots) for one block, times = inf when
# no passage happened before t_max
# ---------------------------------------------------------------------------

def _cl_block(model: LevyModel, x: float, n: int, t_max: float, rng):
    """Exact event-driven sampler for x + p*t - sum S_i, p > 0.

    The level only rises between claims, so passage can happen only at a
    claim epoch.
    """
    p = model.drift
    lam = model.jumps.rate
    claim = model.jumps.claim
    times = np.full(n, np.inf)
    under = np.full(n, np.nan)
    idx = np.arange(n)
    level = np.full(n, float(x))
    clock = np.zeros(n)
    K = _CL_CHUNK
    while idx.size and clock.min() <= t_max:
        m = idx.size
        gaps = rng.standard_exponential((m, K)) / lam
        sizes = claim.sample(rng, m * K).reshape(m, K)
        epochs = clock[:, None] + np.cumsum(gaps, axis=1)
        path = level[:, None] + np.cumsum(p * gaps - sizes, axis=1)
        below = path < 0
        hit = below.any(axis=1)
        first = np.argmax(below, axis=1)
        rows = np.nonzero(hit)[0]
        t_hit = epochs[rows, first[rows]]
        ok = t_hit <= t_max
        times[idx[rows[ok]]] = t_hit[ok]
        under[idx[rows[ok]]] = -path[rows[ok], first[rows[ok]]]
        keep = ~hit
        idx, level, clock = idx[keep], path[keep, -1], epochs[keep, -1]
    return times, under


def _brownian_block(model: LevyModel, x: float, n: int, t_max: float, rng):
    """Ruin indicator, then the passage time given ruin (inverse Gaussian law).

    For p > 0 the conditioned time is inverse Gaussian with mean x/p; for
    p < 0 the plain passage time is inverse Gaussian with mean x/|p|; for
    p = 0 it is x^2 / (sigma^2 Z^2).
    """
    p, s2 = model.drift, model.gaussian_var
    u = rng.random(n)
    if p == 0:
        z = rng.standard_normal(n)
        with np.errstate(divide="ignore"):
            t = x * x / (s2 * z * z)
    else:
        t = rng.wald(x / abs(p), x * x / s2, n)
    if p > 0:
        t = np.where(u < math.exp(-2.0 * p * x / s2), t, np.inf)
    t = np.where(t <= t_max, t, np.inf)
    return t, None


def _jd_block(model: LevyModel, x: float, n: int, t_max: float, rng, h: float):
    """Diffusive steps of length min(h, time to next claim) with exact claims.

    Between grid points the Brownian bridge crossing probability
    exp(-2ab/(sigma^2 dt)) catches excursions the grid misses; a crossing
    inside a step is dated at the end of the step, which is the O(h) bias.
    """
    p, s2 = model.drift, model.gaussian_var
    lam = model.jumps.rate
    claim = model.jumps.claim
    times = np.full(n, np.inf)
    under = np.full(n, np.nan)
    idx = np.arange(n)
    level = np.full(n, float(x))
    clock = np.zeros(n)
    to_jump = rng.standard_exponential(n) / lam
    while idx.size and clock.min() <= t_max:
        m = idx.size
        dt = np.minimum(h, to_jump)
        z = rng.standard_normal(m)
        u = rng.random(m)
        end = level + p * dt + np.sqrt(s2 * dt) * z
        with np.errstate(over="ignore", invalid="ignore"):
            bridge = np.exp(-2.0 * level * np.maximum(end, 0.0) / (s2 * dt))
        crossed = (end < 0) | (u < bridge)
        clock = clock + dt
        to_jump = to_jump - dt
        jumping = (~crossed) & (to_jump <= 0)
        jr = np.nonzero(jumping)[0]
        if jr.size:
            end[jr] -= claim.sample(rng, jr.size)
            to_jump[jr] = rng.standard_exponential(jr.size) / lam
        dropped = np.zeros(m, dtype=bool)
        dropped[jr] = end[jr] < 0
        done = crossed | dropped
        rows = np.nonzero(done)[0]
        ok = clock[rows] <= t_max
        times[idx[rows[ok]]] = clock[rows[ok]]
        jump_rows = rows[ok & dropped[rows]]
        under[idx[jump_rows]] = -end[jump_rows]
        creep_rows = rows[ok & ~dropped[rows]]
        under[idx[creep_rows]] = 0.0
        keep = ~done
        idx, level, clock, to_jump = idx[keep], end[keep], clock[keep], to_jump[keep]
    return times, under


def _sampler(model: LevyModel):
    if isinstance(model.jumps, StableJumps):
        raise UnsupportedInputError("passage times of stable processes are not simulated")
    if model.jumps is None:
        return "brownian-inverse-gaussian", _brownian_block
    assert isinstance(model.jumps, CompoundPoisson)
    if model.gaussian_var == 0:
        return "cramer-lundberg-exact", _cl_block
    return "jump-diffusion-euler", _jd_block


def _run(model, x, cfg: SimConfig, block_fn):
    nblocks = -(-cfg.n_paths // cfg.block_size)

    def one(b):
        size = min(cfg.block_size, cfg.n_paths - b * cfg.block_size)
        return block_fn(model, x, size, cfg.t_max, block_generator(cfg.seed, b))

    workers = thread_cap(cfg.workers)
    if workers == 1 or nblocks == 1:
        parts = [one(b) for b in range(nblocks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one, range(nblocks)))
    times = np.concatenate([t for t, _ in parts])
    if parts[0][1] is None:
        under = None
    else:
        under = np.concatenate([u for _, u in parts])
    return times, under


def sample_passage_times(model: LevyModel, x: float, cfg: SimConfig) -> PassageSampleSet:
    """Sample tau_x = inf{t : x + X_t < 0} on n_paths independent paths.

    Paths with no passage before ``cfg.t_max`` are counted as censored.
    """
    if not (x >= 0 and math.isfinite(x)):
        raise DomainError(f"x must be finite and >= 0, got {x}")
    method, fn = _sampler(model)
    if x == 0 and not model.bounded_variation:
        raise DomainError("x = 0 is excluded for processes of unbounded variation")
    x = float(x)
    meta = {}
    approximate = False
    if method == "jump-diffusion-euler":
        approximate = True
        h = cfg.diffusion_step

        def step(m, xx, k, tm, rng, h=h):
            return _jd_block(m, xx, k, tm, rng, h)

        times, under = _run(model, x, cfg, step)
        meta["diffusion_step"] = float(h)
        if cfg.bias_check:
            half = lambda m, xx, k, tm, rng: _jd_block(m, xx, k, tm, rng, 0.5 * h)
            t2, _ = _run(model, x, cfg, half)
            meta["bias_estimate_mean_tau"] = _bias(times, t2)
            meta["bias_estimate_ruin_freq"] = float(np.isfinite(t2).mean() - np.isfinite(times).mean())
    else:
        times, under = _run(model, x, cfg, fn)
    finite = np.isfinite(times)
    return PassageSampleSet(
        finite_times=times[finite],
        censored_count=int(cfg.n_paths - finite.sum()),
        x=x,
        model_digest=model.digest,
        seed=int(cfg.seed),
        n_paths=int(cfg.n_paths),
        t_max=float(cfg.t_max),
        method=method,
        undershoots=None if under is None else under[finite],
        approximate=approximate,
        metadata=meta,
    )


def _bias(t_h, t_half):
    # mean passage time at step h minus the same at h/2
    a, b = t_h[np.isfinite(t_h)], t_half[np.isfinite(t_half)]
    if a.size == 0 or b.size == 0:
        return float("nan")
    return float(a.mean() - b.mean())


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MomentEstimate:
    estimate: float
    std_error: float
    n: int
    divergence_suspected: bool
    censored_fraction: float

    def to_dict(self) -> dict:
        return {"estimate": self.estimate, "std_error": self.std_error, "n": self.n,
                "divergence_suspected": self.divergence_suspected,
                "censored_fraction": self.censored_fraction}


def _jackknife_mean(v: np.ndarray):
    n = v.size
    loo = (v.sum() - v) / (n - 1)
    se = math.sqrt((n - 1) / n * float(np.sum((loo - loo.mean()) ** 2)))
    return float(v.mean()), se


def empirical_moment(s: PassageSampleSet, kappa: float) -> MomentEstimate:
    """Mean of tau^kappa over the finite samples with a jackknife standard error.

    ``divergence_suspected`` is set when the largest sample carries more than
    half of the sum, the usual symptom of an infinite moment.
    """
    if not kappa > 0:
        raise DomainError(f"kappa must be > 0, got {kappa}")
    if s.n_finite < 2:
        raise DomainError(f"need at least 2 finite samples, got {s.n_finite}")
    v = s.finite_times ** kappa
    est, se = _jackknife_mean(v)
    total = float(v.sum())
    flag = total > 0 and float(v.max()) / total > 0.5
    return MomentEstimate(est, se, s.n_finite, bool(flag), s.censored_fraction)


def tail_index(s: PassageSampleSet, k_frac: float = 0.05) -> float:
    """Hill estimate of the Pareto exponent of the finite passage times."""
    if not 0 < k_frac < 1:
        raise DomainError(f"k_frac must lie in (0, 1), got {k_frac}")
    n = s.n_finite
    if n < 100:
        raise DomainError(f"tail index needs at least 100 finite samples, got {n}")
    return hill(s.finite_times, k_frac)


def hill(samples: np.ndarray, k_frac: float = 0.05) -> float:
    n = samples.size
    k = min(int(math.ceil(k_frac * n)), n - 1)
    top = np.sort(samples)[::-1][: k + 1]
    if top[k] <= 0:
        raise DomainError("Hill estimator needs positive order statistics")
    logs = np.log(top[:k]) - math.log(top[k])
    return float(1.0 / logs.mean())


def empirical_laplace(s: PassageSampleSet, q: float):
    """E[exp(-q tau)] over all paths, censored paths contributing 0; (value, se)."""
    if not q >= 0:
        raise DomainError(f"q must be >= 0, got {q}")
    v = np.zeros(s.n_paths)
    v[: s.n_finite] = np.exp(-q * s.finite_times)
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(s.n_paths))


def empirical_exponential_moment(s: PassageSampleSet, q: float):
    """E[exp(q tau) | tau < inf] from the finite samples; (value, se)."""
    if s.n_finite < 2:
        raise DomainError(f"need at least 2 finite samples, got {s.n_finite}")
    v = np.exp(q * s.finite_times)
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


def with_workers(cfg: SimConfig, workers: int) -> SimConfig:
    return replace(cfg, workers=workers)
