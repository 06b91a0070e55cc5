"""Command-line front end: ``levy-passage <command> --model file.toml ...``.

Exit codes: 0 success, 1 numerical failure (or a failed verify suite),
2 input error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .classify import classify_moment
from .config import load_model
from .errors import DomainError, LevyPassageError, ModelError, NumericalError, UnsupportedInputError
from .fracmoment import passage_moment
from .model import mean, regime
from .scale import ScaleEvaluator
from .simulate import SimConfig, empirical_moment, sample_passage_times
from .suites import SUITES, run_suite

__all__ = ["RunReport", "cmd_analyze", "cmd_moment", "cmd_lt", "cmd_scale", "cmd_simulate",
           "cmd_verify", "main"]

EXIT_OK, EXIT_NUMERIC, EXIT_INPUT = 0, 1, 2


def _jsonable(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if isinstance(v, float) and math.isnan(v):
        return "nan"
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.generic):
        return _jsonable(v.item())
    return v


@dataclass
class RunReport:
    command: str
    model_digest: str
    inputs: dict
    outputs: dict
    warnings: List[str] = field(default_factory=list)
    exit_code: int = EXIT_OK
    csv: Optional[str] = None  # written only through --out

    def to_dict(self) -> dict:
        return _jsonable({"command": self.command, "model_digest": self.model_digest,
                          "inputs": self.inputs, "outputs": self.outputs,
                          "warnings": self.warnings, "exit_code": self.exit_code})

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def render(self) -> str:
        lines = [f"{self.command}  model {self.model_digest}"]
        for k, v in self.inputs.items():
            lines.append(f"  {k:<14} {v}")
        for k, v in self.outputs.items():
            if k == "rows":
                continue
            lines.append(f"  {k:<14} {_jsonable(v)}")
        rows = self.outputs.get("rows")
        if rows:
            cols = list(rows[0])
            lines.append("  " + "  ".join(f"{c:>14}" for c in cols))
            for r in rows:
                lines.append("  " + "  ".join(f"{_fmt(r[c]):>14}" for c in cols))
        for w in self.warnings:
            lines.append(f"  warning: {w}")
        return "\n".join(lines)


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def _rows_csv(rows) -> str:
    cols = list(rows[0])
    out = [",".join(cols)]
    for r in rows:
        out.append(",".join(repr(r[c]) if isinstance(r[c], float) else str(r[c]) for c in cols))
    return "\n".join(out) + "\n"


def parse_grid(text: str) -> List[float]:
    """``a:b:n`` (n points from a to b), a comma list, or one number."""
    try:
        if ":" in text:
            a, b, n = text.split(":")
            n = int(n)
            if n < 1:
                raise ValueError
            return [float(v) for v in np.linspace(float(a), float(b), n)]
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise DomainError(f"bad grid {text!r}; use a number, a,b,c or a:b:n") from None


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_analyze(model_file, kappa: float, x: float = 1.0) -> RunReport:
    model = load_model(model_file)
    v = classify_moment(model, kappa, x)
    out = {"regime": str(regime(model)), "mean": mean(model)}
    out.update(v.to_dict())
    return RunReport("analyze", model.digest, {"model": str(model_file), "kappa": kappa, "x": x}, out)


def cmd_moment(model_file, kappa: float, x: float = 1.0, method: str = "analytic",
               n_paths: int = 100_000, seed: int = 0, t_max: float = 1e4,
               workers: int = 1) -> RunReport:
    if not kappa > 0:
        raise DomainError(f"kappa must be > 0, got {kappa}")
    if method not in ("analytic", "mc", "both"):
        raise DomainError(f"method must be analytic, mc or both, got {method!r}")
    model = load_model(model_file)
    inputs = {"model": str(model_file), "kappa": kappa, "x": x, "method": method}
    out, warnings = {}, []
    verdict = classify_moment(model, kappa, x)
    out["verdict"] = str(verdict.verdict)
    if method in ("analytic", "both"):
        ev = ScaleEvaluator(model)
        value = passage_moment(ev, x, kappa)
        out["analytic"] = {"value": value, "method": "quadrature", "error_estimate": 1e-4 * abs(value)
                           if math.isfinite(value) else None}
        if ev.experimental:
            warnings.append("stable model: Laplace inversion is experimental")
        if verdict.finite is not None and verdict.finite != math.isfinite(value):
            warnings.append(f"classifier says {verdict.verdict} but the numerics give {value}")
    if method in ("mc", "both"):
        inputs.update(n_paths=n_paths, seed=seed, t_max=t_max)
        s = sample_passage_times(model, x, SimConfig(n_paths, seed=seed, t_max=t_max, workers=workers))
        m = empirical_moment(s, kappa)
        out["monte_carlo"] = {"value": m.estimate, "method": "monte-carlo", "error_estimate": m.std_error,
                              "censored_fraction": m.censored_fraction}
        if m.divergence_suspected:
            warnings.append("largest sample carries over half of the sum: moment may be infinite")
        if s.approximate:
            warnings.append("jump-diffusion sampler is biased (Euler step); see bias estimate")
            out["monte_carlo"]["bias_estimate_mean_tau"] = s.metadata.get("bias_estimate_mean_tau")
    if method == "both":
        a, mc = out["analytic"]["value"], out["monte_carlo"]
        if math.isfinite(a) and mc["error_estimate"] > 0:
            out["agreement_se"] = abs(a - mc["value"]) / mc["error_estimate"]
    return RunReport("moment", model.digest, inputs, out, warnings)


def cmd_lt(model_file, x: float, q_grid: Sequence[float]) -> RunReport:
    model = load_model(model_file)
    ev = ScaleEvaluator(model)
    rows = [{"q": float(q), "value": ev.passage_lt(q, x), "method": ev.method_tag,
             "error_estimate": ev.accuracy} for q in q_grid]
    warnings = ["stable model: Laplace inversion is experimental"] if ev.experimental else []
    return RunReport("lt", model.digest, {"model": str(model_file), "x": x}, {"rows": rows},
                     warnings, csv=_rows_csv(rows))


def cmd_scale(model_file, q: float, x_grid: Sequence[float]) -> RunReport:
    model = load_model(model_file)
    ev = ScaleEvaluator(model)
    rows = [{"x": float(x), "W": ev.W(q, x), "Z": ev.Z(q, x), "method": ev.method_tag,
             "error_estimate": ev.accuracy} for x in x_grid]
    warnings = ["stable model: Laplace inversion is experimental"] if ev.experimental else []
    return RunReport("scale", model.digest, {"model": str(model_file), "q": q}, {"rows": rows},
                     warnings, csv=_rows_csv(rows))


def cmd_simulate(model_file, x: float, n: int, seed: int, t_max: float = 1e4,
                 workers: int = 1, diffusion_step: float = 1e-3) -> RunReport:
    model = load_model(model_file)
    cfg = SimConfig(n, seed=seed, t_max=t_max, workers=workers, diffusion_step=diffusion_step)
    s = sample_passage_times(model, x, cfg)
    summary = s.summary()
    summary["method_tag"] = "monte-carlo"
    warnings = []
    if s.approximate:
        warnings.append("jump-diffusion sampler is biased (Euler step); see bias estimate")
    inputs = {"model": str(model_file), "x": x, "n_paths": n, "seed": seed, "t_max": t_max}
    return RunReport("simulate", model.digest, inputs, summary, warnings, csv=s.to_csv())


def cmd_verify(suite_name: str) -> RunReport:
    if suite_name != "all" and suite_name not in SUITES:
        raise DomainError(f"unknown suite {suite_name!r}; choose from all, {', '.join(SUITES)}")
    results = run_suite(suite_name)
    failed = [r for r in results if not r.passed]
    out = {"passed": len(results) - len(failed), "failed": len(failed),
           "checks": {r.name: {"passed": r.passed, "detail": r.detail} for r in results}}
    return RunReport("verify", "-", {"suite": suite_name}, out,
                     exit_code=EXIT_NUMERIC if failed else EXIT_OK)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="levy-passage",
                                 description="Passage times of spectrally negative Levy processes.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the report as JSON")
    common.add_argument("--out", help="write CSV output to this path")
    sub = ap.add_subparsers(dest="command", required=True)

    def with_model(name, help_):
        p = sub.add_parser(name, help=help_, parents=[common])
        p.add_argument("--model", required=True, help="model TOML file")
        return p

    p = with_model("analyze", "regime and moment-existence verdict")
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--x", type=float, default=1.0)

    p = with_model("moment", "fractional moment of the passage time")
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--x", type=float, default=1.0)
    p.add_argument("--method", choices=("analytic", "mc", "both"), default="analytic")
    p.add_argument("--n-paths", type=_positive_int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--t-max", type=float, default=1e4)
    p.add_argument("--workers", type=_positive_int, default=1)

    p = with_model("lt", "Laplace transform E[exp(-q tau_x); tau_x < inf] on a q grid")
    p.add_argument("--x", type=float, default=1.0)
    p.add_argument("--q", default="1", help="number, list a,b,c or grid a:b:n")

    p = with_model("scale", "scale functions W and Z on an x grid")
    p.add_argument("--q", type=float, default=0.0)
    p.add_argument("--x", default="0:5:11", help="number, list a,b,c or grid a:b:n")

    p = with_model("simulate", "Monte Carlo passage times")
    p.add_argument("--x", type=float, default=1.0)
    p.add_argument("--n-paths", type=_positive_int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--t-max", type=float, default=1e4)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--diffusion-step", type=float, default=1e-3)

    p = sub.add_parser("verify", help="run a named invariant suite", parents=[common])
    p.add_argument("suite", help=f"all or one of: {', '.join(SUITES)}")
    return ap


def _dispatch(a) -> RunReport:
    if a.command == "analyze":
        return cmd_analyze(a.model, a.kappa, a.x)
    if a.command == "moment":
        return cmd_moment(a.model, a.kappa, a.x, a.method, a.n_paths, a.seed, a.t_max, a.workers)
    if a.command == "lt":
        return cmd_lt(a.model, a.x, parse_grid(a.q))
    if a.command == "scale":
        return cmd_scale(a.model, a.q, parse_grid(a.x))
    if a.command == "simulate":
        return cmd_simulate(a.model, a.x, a.n_paths, a.seed, a.t_max, a.workers, a.diffusion_step)
    return cmd_verify(a.suite)


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        report = _dispatch(a)
    except (ModelError, DomainError, UnsupportedInputError) as exc:
        print(f"levy-passage: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"levy-passage: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except LevyPassageError as exc:
        print(f"levy-passage: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if a.out:
        if report.csv is None:
            print(f"levy-passage: error: {a.command} has no CSV output", file=sys.stderr)
            return EXIT_INPUT
        Path(a.out).write_text(report.csv)
    print(report.to_json() if a.json else report.render())
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
