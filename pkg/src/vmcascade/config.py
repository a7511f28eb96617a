"""YAML run configurations.

A config names one topology and either a built-in model or explicit
tables.  Tables are nested lists, or mappings ``{shape: [...], values:
[...]}`` with row-major values.  ``inf`` (or YAML ``.inf``) marks a
forbidden action or an unconstrained budget.

Example::

    topology: cascade
    model:
      pxy: [[0.4, 0.1], [0.1, 0.4]]
      p_z_ay: {shape: [2, 2, 2], values: [1, 0, 0, 1, 0.9, 0.1, 0.1, 0.9]}
      cost: [0, 1]
    budget: {gamma: 0.5, d1: 0.1, d2: 0.2}
    sweep: {eta: [0.5, 1.0, 2.0]}
    search: {starts: 32, u_size: 2}
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .broadcast import bsc_example, schannel_example
from .errors import ConfigurationError
from .model import Budget, BroadcastModel, CascadeModel, SwitchingModel
from .search import SearchConfig

TOPOLOGIES = ("cascade", "broadcast-lossless", "switching", "cr")
BUILTINS = ("bsc-example", "s-channel-example")
_SECTIONS = {"topology", "builtin", "model", "budget", "sweep", "search", "weights",
             "channels", "evaluator", "lossless", "fig6", "seed", "output"}


def _number(v, what: str) -> float:
    if isinstance(v, str) and v.strip().lower() in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        out = float(v)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{what}: not a number: {v!r}") from None
    if math.isnan(out):
        raise ConfigurationError(f"{what}: NaN is not allowed")
    return out


def table(node, what: str) -> np.ndarray:
    """Decode a nested list or a ``{shape, values}`` mapping into an array."""
    if isinstance(node, dict):
        if set(node) != {"shape", "values"}:
            raise ConfigurationError(f"{what}: a table mapping needs exactly 'shape' and 'values'")
        shape = tuple(int(s) for s in node["shape"])
        values = [_number(v, what) for v in node["values"]]
        if len(values) != math.prod(shape):
            raise ConfigurationError(
                f"{what}: {len(values)} values do not fill shape {list(shape)}")
        return np.array(values, dtype=float).reshape(shape)
    try:
        arr = np.array(node, dtype=object)
    except ValueError:
        raise ConfigurationError(f"{what}: ragged nested list") from None
    if arr.dtype == object and arr.ndim == 0:
        raise ConfigurationError(f"{what}: expected a table")
    flat = [_number(v, what) for v in arr.ravel()]
    return np.array(flat, dtype=float).reshape(arr.shape)


def axis(node, what: str) -> list[float]:
    """A sweep axis: a scalar, a list, or ``{start, stop, num}``."""
    if isinstance(node, dict):
        if set(node) != {"start", "stop", "num"}:
            raise ConfigurationError(f"{what}: a range needs exactly start, stop, num")
        num = int(node["num"])
        if num < 1:
            raise ConfigurationError(f"{what}: num must be >= 1")
        return [float(v) for v in np.linspace(_number(node["start"], what),
                                              _number(node["stop"], what), num)]
    if isinstance(node, (list, tuple)):
        if not node:
            raise ConfigurationError(f"{what}: empty axis")
        return [_number(v, what) for v in node]
    return [_number(node, what)]


@dataclass(frozen=True, eq=False)
class RunConfig:
    topology: str
    raw: dict
    builtin: str | None = None
    model: CascadeModel | BroadcastModel | SwitchingModel | None = None
    budget: Budget = Budget()
    sweep: dict = field(default_factory=dict)
    search: SearchConfig = SearchConfig()
    weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    channels: tuple = ()
    evaluator: str = "closed-form"
    lossless: bool = False

    def digest(self, seed: int | None, command: str) -> str:
        return config_hash(self.raw, seed, command)


def config_hash(raw: dict, seed: int | None, command: str) -> str:
    blob = json.dumps({"command": command, "config": raw, "seed": seed},
                      sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _budget(node) -> Budget:
    node = node or {}
    extra = set(node) - {"gamma", "d1", "d2"}
    if extra:
        raise ConfigurationError(f"budget: unknown keys {sorted(extra)}")
    return Budget(**{k: _number(v, f"budget.{k}") for k, v in node.items()})


def _search(node, seed: int | None) -> SearchConfig:
    node = dict(node or {})
    allowed = set(SearchConfig.__dataclass_fields__) - {"seed"}
    extra = set(node) - allowed
    if extra:
        raise ConfigurationError(f"search: unknown keys {sorted(extra)}")
    if seed is not None:
        node["seed"] = int(seed)
    try:
        return SearchConfig(**node)
    except TypeError as exc:
        raise ConfigurationError(f"search: {exc}") from None


def _need(node: dict, key: str, section: str):
    if key not in node:
        raise ConfigurationError(f"{section}: missing '{key}'")
    return node[key]


def _cascade_model(node: dict) -> CascadeModel:
    return CascadeModel.from_arrays(
        table(_need(node, "pxy", "model"), "model.pxy"),
        table(_need(node, "p_z_ay", "model"), "model.p_z_ay"),
        table(_need(node, "cost", "model"), "model.cost"),
        table(node["d1"], "model.d1") if "d1" in node else None,
        table(node["d2"], "model.d2") if "d2" in node else None,
    )


def _broadcast_model(node: dict, degraded: bool) -> BroadcastModel:
    px = table(_need(node, "px", "model"), "model.px")
    cost = table(_need(node, "cost", "model"), "model.cost")
    d1 = table(node["d1"], "model.d1") if "d1" in node else None
    d2 = table(node["d2"], "model.d2") if "d2" in node else None
    if "p_yz_ax" in node:
        if "p_y_ax" in node or "p_z_ay" in node:
            raise ConfigurationError("model: give p_yz_ax or (p_y_ax, p_z_ay), not both")
        return BroadcastModel.from_arrays(px, table(node["p_yz_ax"], "model.p_yz_ax"), cost,
                                          d1, d2, degraded=degraded)
    return BroadcastModel.degraded_from(px, table(_need(node, "p_y_ax", "model"), "model.p_y_ax"),
                                        table(_need(node, "p_z_ay", "model"), "model.p_z_ay"),
                                        cost, d1, d2)


def _switching_model(node: dict) -> SwitchingModel:
    return SwitchingModel.from_arrays(table(_need(node, "pxw", "model"), "model.pxw"),
                                      [_number(v, "model.lambdas")
                                       for v in _need(node, "lambdas", "model")])


def parse_config(raw, seed: int | None = None) -> RunConfig:
    """Validate a loaded mapping and build the model it describes."""
    if not isinstance(raw, dict):
        raise ConfigurationError("config must be a mapping")
    extra = set(raw) - _SECTIONS
    if extra:
        raise ConfigurationError(f"unknown sections {sorted(extra)}")
    topology = raw.get("topology")
    if topology not in TOPOLOGIES:
        raise ConfigurationError(f"topology must be one of {', '.join(TOPOLOGIES)}")
    builtin = raw.get("builtin")
    model = None
    if builtin is not None:
        if builtin not in BUILTINS:
            raise ConfigurationError(f"builtin must be one of {', '.join(BUILTINS)}")
        if topology != "switching":
            raise ConfigurationError(f"built-in {builtin} is a switching model")
        if "model" in raw:
            raise ConfigurationError(f"built-in {builtin} does not accept model tables")
    else:
        node = raw.get("model")
        if not isinstance(node, dict):
            raise ConfigurationError("model: section missing (or give a builtin)")
        if topology == "cascade":
            model = _cascade_model(node)
        elif topology == "switching":
            model = _switching_model(node)
        else:
            model = _broadcast_model(node, degraded=topology == "cr")

    sweep = {}
    for key, value in (raw.get("sweep") or {}).items():
        sweep[key] = axis(value, f"sweep.{key}")
    weights = tuple(_number(w, "weights") for w in raw.get("weights", (1.0, 1.0, 1.0)))
    if len(weights) != 3 or min(weights) < 0:
        raise ConfigurationError("weights must be three nonnegative numbers [w1, w2, wb]")
    evaluator = raw.get("evaluator", "closed-form")
    if evaluator not in ("closed-form", "exact"):
        raise ConfigurationError("evaluator must be closed-form or exact")
    channels = raw.get("channels") or ()
    if not isinstance(channels, (list, tuple)):
        raise ConfigurationError("channels must be a list")
    return RunConfig(topology, raw, builtin, model, _budget(raw.get("budget")), sweep,
                     _search(raw.get("search"), seed if seed is not None else raw.get("seed")),
                     weights, tuple(channels), evaluator, bool(raw.get("lossless", False)))


def load_config(path, seed: int | None = None) -> RunConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"{path}: invalid YAML: {exc}") from None
    return parse_config(raw, seed)


def builtin_model(name: str, delta: float) -> SwitchingModel:
    return bsc_example(delta) if name == "bsc-example" else schannel_example(delta)
