"""Experiment configuration files.

A config is a TOML document; every key is optional and falls back to the
library defaults. Unknown keys are rejected with their dotted path.

    seed = 0
    units = [2, 30, 1]
    activation = "tanh"            # or: activations = ["tanh", "tanh"]
    linear_output = true
    learning_rate = 3.2040e-4
    epochs_max = 50000
    batch_size = 50
    noise = 0.0
    stddev = 0.0
    tolerance = 0.0
    mae_checkpoints = [10000, 20000, 50000]
    validation_grid = 100
    output_dir = "runs/paper_tanh"

    [optimizer]
    name = "adam"                  # or "sgd"
    beta1 = 0.9

    [search]
    mode = "grid"                  # or "random"
    intervals = [[1e-5, 1e-4], [1e-4, 1e-3]]
    points_per_interval = 50
    seed = 0
    log_spacing = false
    activations = ["tanh", "gelu"]
    search_epochs = 10000
    retrain_epochs = 0
"""
from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
import os
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .autodiff import Activation
from .hypertune import DEFAULT_INTERVALS, SearchSpace
from .network import ConfigError, LayerSpec
from .training import DEFAULT_CHECKPOINTS, TrainConfig, optimizer_from_dict

SEED_ENV = "PINNLAB_SEED"

_TOP_KEYS = {
    "seed", "units", "activation", "activations", "linear_output", "optimizer",
    "learning_rate", "epochs_max", "batch_size", "noise", "stddev", "tolerance",
    "mae_checkpoints", "validation_grid", "output_dir", "search",
}
_SEARCH_KEYS = {
    "mode", "intervals", "points_per_interval", "seed", "log_spacing", "activations",
    "search_epochs", "retrain_epochs",
}


@dataclass
class ExperimentConfig:
    train: TrainConfig
    space: SearchSpace = field(default_factory=SearchSpace)
    search_activations: tuple = ("tanh", "sigmoid", "gelu", "elu", "relu")
    search_epochs: int = 10000
    retrain_epochs: int = 0
    output_dir: str = "runs/out"
    raw: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "train": self.train.to_dict(),
            "search": {
                **self.space.to_dict(),
                "activations": list(self.search_activations),
                "search_epochs": self.search_epochs,
                "retrain_epochs": self.retrain_epochs,
            },
            "output_dir": self.output_dir,
        }


def preset_names():
    return sorted(p.name[:-5] for p in resources.files("pinnlab.presets").iterdir()
                  if p.name.endswith(".toml"))


def resolve_config_path(name):
    """A filesystem path, or the name of a shipped preset (``.toml`` optional)."""
    path = Path(name)
    if path.is_file():
        return path
    stem = path.name[:-5] if path.name.endswith(".toml") else path.name
    candidate = resources.files("pinnlab.presets") / f"{stem}.toml"
    if candidate.is_file():
        return candidate
    raise FileNotFoundError(f"no config file or preset named {name!r}")


def read_config_text(name):
    return resolve_config_path(name).read_text()


def parse_override(text):
    """``key.path=value`` with the value read as a TOML literal (bare strings allowed)."""
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"--set: expected key=value, got {text!r}")
    try:
        parsed = tomllib.loads(f"v = {value.strip()}")["v"]
    except tomllib.TOMLDecodeError:
        parsed = value.strip()
    return key.strip().split("."), parsed


def apply_overrides(doc, overrides):
    for text in overrides:
        path, value = parse_override(text)
        node = doc
        for part in path[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"--set {text}: {part!r} is not a table")
        if path[-1] == "activation":
            node.pop("activations", None)
        elif path[-1] == "activations" and len(path) == 1:
            node.pop("activation", None)
        node[path[-1]] = value
    return doc


def load_config(name, overrides=(), env=None):
    """Read a config file or preset, apply ``--set`` overrides, and validate."""
    try:
        doc = tomllib.loads(read_config_text(name))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config {name}: {exc}") from exc
    env = os.environ if env is None else env
    if env.get(SEED_ENV):
        try:
            doc["seed"] = int(env[SEED_ENV])
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV}: expected an integer, got {env[SEED_ENV]!r}") from exc
    apply_overrides(doc, overrides)
    return build_config(doc)


def _typed(doc, key, kind, path=None):
    value = doc[key]
    path = path or key
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if kind is int and isinstance(value, bool) or not isinstance(value, kind):
        raise ConfigError(f"{path}: expected {kind.__name__}, got {value!r}")
    return value


def build_config(doc) -> ExperimentConfig:
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown field(s): {', '.join(sorted(unknown))}")
    if "activation" in doc and "activations" in doc:
        raise ConfigError("activation: give either 'activation' or 'activations', not both")

    units = tuple(doc.get("units", (2, 30, 1)))
    linear = bool(_typed(doc, "linear_output", bool)) if "linear_output" in doc else False
    try:
        if "activations" in doc:
            acts = tuple(Activation.parse(a) for a in doc["activations"])
            spec = LayerSpec(units, acts, linear)
        else:
            spec = LayerSpec.uniform(units, doc.get("activation", "tanh"), linear)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"activations: {exc}") from exc

    opt = doc.get("optimizer", {"name": "adam"})
    if isinstance(opt, str):
        opt = {"name": opt}
    optimizer = optimizer_from_dict(opt)

    kw = {}
    for key, kind in (("seed", int), ("learning_rate", float), ("epochs_max", int),
                      ("batch_size", int), ("noise", float), ("stddev", float),
                      ("tolerance", float), ("validation_grid", int)):
        if key in doc:
            kw[key] = _typed(doc, key, kind)
    cps = tuple(doc.get("mae_checkpoints", DEFAULT_CHECKPOINTS))
    train = TrainConfig(spec=spec, optimizer=optimizer, mae_checkpoints=cps, **kw)

    search = doc.get("search", {})
    if not isinstance(search, dict):
        raise ConfigError("search: expected a table")
    unknown = set(search) - _SEARCH_KEYS
    if unknown:
        raise ConfigError(f"unknown field(s): {', '.join('search.' + k for k in sorted(unknown))}")
    skw = {}
    for key, kind in (("mode", str), ("points_per_interval", int), ("seed", int),
                      ("log_spacing", bool)):
        if key in search:
            skw[key] = _typed(search, key, kind, f"search.{key}")
    intervals = search.get("intervals", DEFAULT_INTERVALS)
    try:
        intervals = tuple((float(lo), float(hi)) for lo, hi in intervals)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"search.intervals: expected [[lo, hi], ...] ({exc})") from exc
    space = SearchSpace(intervals=intervals, **skw)

    acts = search.get("activations", ExperimentConfig.search_activations)
    if isinstance(acts, str):
        acts = [a for a in acts.split(",") if a.strip()]
    try:
        acts = tuple(str(Activation.parse(a)) for a in acts)
    except ValueError as exc:
        raise ConfigError(f"search.activations: {exc}") from exc

    out = ExperimentConfig(
        train=train,
        space=space,
        search_activations=acts,
        search_epochs=_typed(search, "search_epochs", int, "search.search_epochs")
        if "search_epochs" in search else 10000,
        retrain_epochs=_typed(search, "retrain_epochs", int, "search.retrain_epochs")
        if "retrain_epochs" in search else 0,
        output_dir=str(doc.get("output_dir", "runs/out")),
        raw=doc,
    )
    if out.search_epochs < 1:
        raise ConfigError("search.search_epochs: must be >= 1")
    if out.retrain_epochs < 0:
        raise ConfigError("search.retrain_epochs: must be >= 0")
    return out
