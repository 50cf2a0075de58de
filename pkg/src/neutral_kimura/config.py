"""Scenario configuration: JSON in, validated dataclasses out, and back."""

import json
import math
from dataclasses import dataclass
from typing import Optional

from . import kimura
from .wf_oracle import WfConfig, WfConfigError, generation_for_time


class ConfigError(ValueError):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class ScenarioConfig:
    initial_condition: object
    truncation: int
    times: tuple
    quad_order: int
    output_grid: int = 101
    wf: Optional[WfConfig] = None

    def to_dict(self):
        out = {
            "initial_condition": ic_to_dict(self.initial_condition),
            "truncation": self.truncation,
            "times": list(self.times),
            "quad_order": self.quad_order,
            "output_grid": self.output_grid,
            "kappa": 1.0,
        }
        if self.wf is not None:
            out["wf"] = {
                "population_size": self.wf.population_size,
                "x0": self.wf.x0,
                "generations": self.wf.generations,
                "replicates": self.wf.replicates,
                "seed": self.wf.seed,
            }
        return out


def ic_to_dict(ic):
    if isinstance(ic, kimura.Delta):
        return {"type": "delta", "x0": ic.x0}
    if isinstance(ic, kimura.PolynomialDensity):
        return {"type": "polynomial", "coefficients": list(ic.coefficients)}
    return {"type": "tabulated", "x": list(ic.x), "values": list(ic.values)}


def _number(value, path, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(path, "must be finite")
    if integer:
        if int(value) != value:
            raise ConfigError(path, f"expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _number_list(value, path):
    if not isinstance(value, list):
        raise ConfigError(path, "expected a list of numbers")
    return tuple(_number(v, f"{path}[{i}]") for i, v in enumerate(value))


def _parse_ic(raw):
    path = "initial_condition"
    if not isinstance(raw, dict):
        raise ConfigError(path, "expected an object")
    kind = raw.get("type")
    try:
        if kind == "delta":
            _allowed(raw, {"type", "x0"}, path)
            return kimura.Delta(_number(_required(raw, "x0", path), f"{path}.x0"))
        if kind == "polynomial":
            _allowed(raw, {"type", "coefficients"}, path)
            coeffs = _number_list(_required(raw, "coefficients", path), f"{path}.coefficients")
            return kimura.PolynomialDensity(coeffs)
        if kind == "tabulated":
            _allowed(raw, {"type", "x", "values"}, path)
            return kimura.Tabulated(
                _number_list(_required(raw, "x", path), f"{path}.x"),
                _number_list(_required(raw, "values", path), f"{path}.values"),
            )
    except kimura.InitialConditionError as exc:
        raise ConfigError(path, str(exc)) from None
    raise ConfigError(f"{path}.type", f"must be one of 'delta', 'polynomial', 'tabulated', got {kind!r}")


def _required(raw, key, path):
    if key not in raw:
        raise ConfigError(f"{path}.{key}", "required field is missing")
    return raw[key]


def _allowed(raw, keys, path):
    extra = sorted(set(raw) - keys)
    if extra:
        raise ConfigError(f"{path}.{extra[0]}", "unknown field")


def _parse_wf(raw, ic, times):
    path = "wf"
    if not isinstance(raw, dict):
        raise ConfigError(path, "expected an object")
    _allowed(raw, {"population_size", "x0", "generations", "replicates", "seed"}, path)
    pop = _number(_required(raw, "population_size", path), f"{path}.population_size", integer=True)
    if "x0" in raw:
        x0 = _number(raw["x0"], f"{path}.x0")
    elif isinstance(ic, kimura.Delta):
        x0 = ic.x0
    else:
        raise ConfigError(f"{path}.x0", "required unless the initial condition is a delta")
    if "generations" in raw:
        generations = _number(raw["generations"], f"{path}.generations", integer=True)
    else:
        generations = max([generation_for_time(t, pop) for t in times], default=0)
    replicates = _number(raw.get("replicates", 100_000), f"{path}.replicates", integer=True)
    seed = _number(raw.get("seed", 0), f"{path}.seed", integer=True)
    try:
        return WfConfig(population_size=pop, x0=x0, generations=generations, replicates=replicates, seed=seed)
    except WfConfigError as exc:
        raise ConfigError(path, str(exc)) from None


def parse_config(raw):
    """Validate a decoded JSON object and fill in defaults."""
    if not isinstance(raw, dict):
        raise ConfigError("$", "configuration must be a JSON object")
    _allowed(raw, {"initial_condition", "truncation", "times", "quad_order", "output_grid", "kappa", "wf"}, "$")
    ic = _parse_ic(_required(raw, "initial_condition", "$"))
    if "kappa" in raw and _number(raw["kappa"], "kappa") != 1.0:
        raise ConfigError("kappa", "only kappa = 1 is supported (other values are a time rescaling)")
    default_n = kimura.DEFAULT_TRUNCATION_DELTA if isinstance(ic, kimura.Delta) else kimura.DEFAULT_TRUNCATION_SMOOTH
    truncation = _number(raw.get("truncation", default_n), "truncation", integer=True)
    if truncation < 2:
        raise ConfigError("truncation", "must be at least 2")
    times = _number_list(raw.get("times", []), "times")
    if any(t < 0 for t in times):
        raise ConfigError("times", "times must be nonnegative")
    if any(b < a for a, b in zip(times, times[1:])):
        raise ConfigError("times", "times must be sorted ascending")
    needed = max(truncation // 2 + 2, 0 if isinstance(ic, kimura.Delta) else kimura.min_quad_order(ic, truncation))
    quad_order = _number(raw.get("quad_order", needed), "quad_order", integer=True)
    if quad_order < needed:
        raise ConfigError("quad_order", f"must be at least {needed} for truncation {truncation}")
    output_grid = _number(raw.get("output_grid", 101), "output_grid", integer=True)
    if output_grid < 2:
        raise ConfigError("output_grid", "must be at least 2")
    wf = _parse_wf(raw["wf"], ic, times) if "wf" in raw else None
    return ScenarioConfig(ic, truncation, times, quad_order, output_grid, wf)


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError("$", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON: {exc}") from None
    return parse_config(raw)
