"""Model files: a ``[model]`` TOML table with strict key checking.

Examples::

    [model]
    kind = "cramer-lundberg"
    p = 2.0
    rate = 1.0
    claim = { type = "pareto", alpha = 2.5, xm = 0.6 }

    [model]
    kind = "brownian"
    p = 0.0
    sigma2 = 1.0
"""
from __future__ import annotations

from pathlib import Path
from typing import Any, Mapping, Union

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ModelError
from .model import Deterministic, Exponential, LevyModel, LogNormal, Pareto

__all__ = ["load_model", "parse_model", "model_to_toml"]

_CLAIMS = {
    "exponential": (Exponential, ("mu",)),
    "pareto": (Pareto, ("alpha", "xm")),
    "lognormal": (LogNormal, ("m", "s")),
    "deterministic": (Deterministic, ("a",)),
}

# kind -> (required keys, optional keys with defaults)
_KINDS = {
    "brownian": (("p",), {"sigma2": 1.0}),
    "cramer-lundberg": (("p", "rate", "claim"), {}),
    "jump-diffusion": (("p", "sigma2", "rate", "claim"), {}),
    "stable": (("alpha",), {"scale": 1.0, "drift": 0.0, "sigma2": 0.0}),
}


def _number(table, key, where):
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ModelError(f"{where}.{key} must be a number, got {v!r}")
    return float(v)


def _check_keys(table, allowed, where):
    extra = sorted(set(table) - set(allowed))
    if extra:
        raise ModelError(f"unknown key {where}.{extra[0]} (allowed: {', '.join(sorted(allowed))})")


def _claim(spec, where):
    if not isinstance(spec, Mapping):
        raise ModelError(f"{where} must be a table")
    if "type" not in spec:
        raise ModelError(f"missing key {where}.type")
    ctype = spec["type"]
    if ctype not in _CLAIMS:
        raise ModelError(f"{where}.type must be one of {sorted(_CLAIMS)}, got {ctype!r}")
    cls, keys = _CLAIMS[ctype]
    _check_keys(spec, ("type",) + keys, where)
    for k in keys:
        if k not in spec:
            raise ModelError(f"missing key {where}.{k}")
    try:
        return cls(*[_number(spec, k, where) for k in keys])
    except ModelError as exc:
        raise ModelError(f"{where}: {exc}") from None


def parse_model(doc: Mapping[str, Any]) -> LevyModel:
    """Build a LevyModel from a parsed document holding a ``model`` table."""
    _check_keys(doc, ("model",), "<root>")
    if "model" not in doc:
        raise ModelError("missing table [model]")
    m = doc["model"]
    if not isinstance(m, Mapping):
        raise ModelError("model must be a table")
    if "kind" not in m:
        raise ModelError("missing key model.kind")
    kind = m["kind"]
    if kind not in _KINDS:
        raise ModelError(f"model.kind must be one of {sorted(_KINDS)}, got {kind!r}")
    required, optional = _KINDS[kind]
    _check_keys(m, ("kind",) + required + tuple(optional), "model")
    for k in required:
        if k not in m:
            raise ModelError(f"missing key model.{k}")
    get = lambda k: _number(m, k, "model") if k in m else optional[k]
    if kind == "brownian":
        return LevyModel.brownian(get("p"), get("sigma2"))
    if kind == "stable":
        return LevyModel.stable(get("alpha"), get("scale"), get("drift"), get("sigma2"))
    claim = _claim(m["claim"], "model.claim")
    if kind == "cramer-lundberg":
        return LevyModel.cramer_lundberg(get("p"), get("rate"), claim)
    return LevyModel.jump_diffusion(get("p"), get("sigma2"), get("rate"), claim)


def load_model(path: Union[str, Path]) -> LevyModel:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ModelError(f"cannot read model file {path}: {exc.strerror}") from None
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ModelError(f"malformed TOML in {path}: {exc}") from None
    return parse_model(doc)


def model_to_toml(model: LevyModel) -> str:
    """Inverse of parse_model, for writing example files."""
    lines = ["[model]", f'kind = "{model.kind}"']
    if model.kind == "stable":
        j = model.jumps
        lines += [f"alpha = {j.alpha!r}", f"scale = {j.scale!r}",
                  f"drift = {model.drift!r}", f"sigma2 = {model.gaussian_var!r}"]
        return "\n".join(lines) + "\n"
    lines.append(f"p = {model.drift!r}")
    if model.kind in ("brownian", "jump-diffusion"):
        lines.append(f"sigma2 = {model.gaussian_var!r}")
    if model.jumps is not None:
        lines.append(f"rate = {model.jumps.rate!r}")
        c = model.jumps.claim.to_dict()
        body = ", ".join(f"{k} = {v!r}" if k != "type" else f'type = "{v}"' for k, v in c.items())
        lines.append(f"claim = {{ {body} }}")
    return "\n".join(lines) + "\n"
