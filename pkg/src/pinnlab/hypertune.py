"""Learning-rate search per activation function.

Candidates come from a set of intervals, either evenly spaced (grid) or
drawn uniformly (random). Every (activation, candidate) pair is an
independent training run; the best run per activation is the one with the
lowest MAE at the last checkpoint, ties going to the smaller rate.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import dataclass, field, replace
import io
import json
import math

import numpy as np

from .autodiff import Activation
from .network import ConfigError, LayerSpec
from .training import TrainConfig, TrainingDiverged, train

DEFAULT_INTERVALS = ((1e-6, 1e-5), (1e-5, 1e-4), (1e-4, 1e-3), (1e-3, 1e-2), (1e-2, 1e-1))


@dataclass(frozen=True)
class SearchSpace:
    intervals: tuple = DEFAULT_INTERVALS
    points_per_interval: int = 50
    mode: str = "grid"
    seed: int = 0
    log_spacing: bool = False

    def __post_init__(self):
        ivs = tuple((float(lo), float(hi)) for lo, hi in self.intervals)
        object.__setattr__(self, "intervals", ivs)
        if not ivs:
            raise ConfigError("search.intervals: need at least one interval")
        for i, (lo, hi) in enumerate(ivs):
            if not (0.0 <= lo < hi):
                raise ConfigError(f"search.intervals[{i}]: need 0 <= lo < hi, got [{lo}, {hi}]")
            if self.log_spacing and lo <= 0.0:
                raise ConfigError(f"search.intervals[{i}]: log spacing needs lo > 0")
        if self.points_per_interval < 1:
            raise ConfigError("search.points_per_interval: must be >= 1")
        if self.mode not in ("grid", "random"):
            raise ConfigError(f"search.mode: expected 'grid' or 'random', got {self.mode!r}")

    def candidates(self):
        return grid_candidates(self) if self.mode == "grid" else random_candidates(self)

    def to_dict(self):
        return {
            "intervals": [list(iv) for iv in self.intervals],
            "points_per_interval": self.points_per_interval,
            "mode": self.mode,
            "seed": self.seed,
            "log_spacing": self.log_spacing,
        }


def grid_candidates(space: SearchSpace):
    """Evenly spaced points per interval, endpoints included (midpoint when n = 1)."""
    n = space.points_per_interval
    out = []
    for lo, hi in space.intervals:
        if space.log_spacing:
            pts = np.sqrt(lo * hi) if n == 1 else np.geomspace(lo, hi, n)
        else:
            pts = 0.5 * (lo + hi) if n == 1 else np.linspace(lo, hi, n)
        out.extend(np.atleast_1d(pts).tolist())
    return sorted(out)


def random_candidates(space: SearchSpace):
    rng = np.random.default_rng(space.seed)
    n = space.points_per_interval
    out = []
    for lo, hi in space.intervals:
        if space.log_spacing:
            pts = np.exp(rng.uniform(np.log(lo), np.log(hi), n))
        else:
            pts = rng.uniform(lo, hi, n)
        out.extend(np.clip(pts, lo, hi).tolist())
    return out


@dataclass
class TrialRecord:
    activation: str
    learning_rate: float
    mae_at: dict
    final_loss: float
    seed: int
    candidate_index: int = 0
    diverged: bool = False

    def metric(self, epoch):
        return self.mae_at.get(epoch, math.inf)

    def to_dict(self):
        return {
            "activation": self.activation,
            "learning_rate": self.learning_rate,
            "mae_at": {str(k): v for k, v in self.mae_at.items()},
            "final_loss": self.final_loss,
            "seed": self.seed,
            "candidate_index": self.candidate_index,
            "diverged": self.diverged,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["mae_at"] = {int(k): float(v) for k, v in d["mae_at"].items()}
        return cls(**d)


@dataclass
class SearchReport:
    trials: list
    best_per_activation: dict
    checkpoints: tuple
    space: SearchSpace = field(default_factory=SearchSpace)
    base_config: TrainConfig | None = None

    @property
    def selection_epoch(self):
        return self.checkpoints[-1]

    def to_dict(self):
        return {
            "space": self.space.to_dict(),
            "base_config": self.base_config.to_dict() if self.base_config else None,
            "checkpoints": list(self.checkpoints),
            "selection_epoch": self.selection_epoch,
            "trials": [t.to_dict() for t in self.trials],
            "best_per_activation": {
                a: {"learning_rate": b["learning_rate"], "seed": b["seed"],
                    "mae_at": {str(k): v for k, v in b["mae_at"].items()}}
                for a, b in self.best_per_activation.items()
            },
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_dict(cls, d):
        space = SearchSpace(**{**d["space"], "intervals": tuple(map(tuple, d["space"]["intervals"]))})
        base = TrainConfig.from_dict(d["base_config"]) if d.get("base_config") else None
        best = {
            a: {"learning_rate": b["learning_rate"], "seed": b["seed"],
                "mae_at": {int(k): float(v) for k, v in b["mae_at"].items()}}
            for a, b in d["best_per_activation"].items()
        }
        return cls([TrialRecord.from_dict(t) for t in d["trials"]], best,
                   tuple(d["checkpoints"]), space, base)

    def trials_csv(self):
        cps = list(self.checkpoints)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["activation", "learning_rate"] + [f"mae_{c}" for c in cps]
                   + ["final_loss", "seed"])
        for t in self.trials:
            maes = [repr(t.mae_at[c]) if c in t.mae_at else repr(math.inf) for c in cps]
            w.writerow([t.activation, repr(t.learning_rate)] + maes + [repr(t.final_loss), t.seed])
        return buf.getvalue()

    def summary_csv(self):
        """Table layout: one row per checkpoint epoch, one column per activation."""
        acts = list(self.best_per_activation)
        epochs = sorted({e for b in self.best_per_activation.values() for e in b["mae_at"]})
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["mae_at_epoch"] + acts)
        for e in epochs:
            row = [self.best_per_activation[a]["mae_at"].get(e) for a in acts]
            w.writerow([e] + ["" if v is None else repr(v) for v in row])
        w.writerow(["learning_rate"] + [repr(self.best_per_activation[a]["learning_rate"])
                                        for a in acts])
        return buf.getvalue()


def trial_seed(base_seed, activation_index, candidate_index):
    ss = np.random.SeedSequence([int(base_seed), int(activation_index), int(candidate_index)])
    return int(ss.generate_state(1)[0])


def trial_config(base: TrainConfig, activation, learning_rate, seed, epochs=None, checkpoints=None):
    """The exact config a search trial trains with."""
    act = activation if isinstance(activation, Activation) else Activation.parse(activation)
    spec = LayerSpec.uniform(base.spec.sizes, act, base.spec.linear_output)
    epochs = epochs or base.epochs_max
    if checkpoints is None:
        checkpoints = _checkpoints_within(base.mae_checkpoints, epochs)
    return replace(base, spec=spec, learning_rate=float(learning_rate), seed=int(seed),
                   epochs_max=int(epochs), mae_checkpoints=tuple(checkpoints))


def _checkpoints_within(cps, epochs):
    kept = tuple(c for c in cps if c <= epochs)
    return kept or (epochs,)


def _run_trial(job):
    trainer, cfg, activation, index = job
    try:
        report = trainer(cfg)
    except TrainingDiverged as exc:
        last = exc.last_finite_loss
        return TrialRecord(activation, cfg.learning_rate,
                           {c: math.inf for c in cfg.mae_checkpoints},
                           math.inf if last is None else last, cfg.seed, index, True)
    return TrialRecord(activation, cfg.learning_rate, dict(report.mae_at),
                       report.loss_history[-1], cfg.seed, index)


def select_best(trials, epoch):
    """Trial with the smallest MAE at ``epoch``; ties go to the smaller rate."""
    return min(trials, key=lambda t: (t.metric(epoch), t.learning_rate))


def run_search(space: SearchSpace, base_cfg: TrainConfig, activations, *, jobs=1,
               search_epochs=None, retrain_epochs=None, trainer=train) -> SearchReport:
    """Train one model per (activation, candidate rate) and pick the best per activation.

    ``search_epochs`` shortens each trial; ``retrain_epochs`` re-trains every
    winner for longer and reports that run's checkpoints instead. A trial
    whose loss stops being finite is recorded with infinite MAE.
    """
    acts = [a if isinstance(a, Activation) else Activation.parse(a) for a in activations]
    names = [str(a) for a in acts]
    if len(set(names)) != len(names):
        raise ConfigError("search.activations: duplicates are not allowed")
    epochs = search_epochs or base_cfg.epochs_max
    cps = _checkpoints_within(base_cfg.mae_checkpoints, epochs)
    lrs = space.candidates()

    jobs_list = []
    for ai, act in enumerate(acts):
        for k, lr in enumerate(lrs):
            cfg = trial_config(base_cfg, act, lr, trial_seed(base_cfg.seed, ai, k), epochs, cps)
            jobs_list.append((trainer, cfg, str(act), k))

    if jobs > 1 and len(jobs_list) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            trials = list(pool.map(_run_trial, jobs_list))
    else:
        trials = [_run_trial(j) for j in jobs_list]

    best = {}
    for name in names:
        winner = select_best([t for t in trials if t.activation == name], cps[-1])
        best[name] = {"learning_rate": winner.learning_rate, "seed": winner.seed,
                      "mae_at": dict(winner.mae_at)}
    if retrain_epochs:
        long_cps = _checkpoints_within(base_cfg.mae_checkpoints, retrain_epochs)
        for name in names:
            cfg = trial_config(base_cfg, name, best[name]["learning_rate"], best[name]["seed"],
                               retrain_epochs, long_cps)
            rec = _run_trial((trainer, cfg, name, -1))
            best[name]["mae_at"] = dict(rec.mae_at)
    return SearchReport(trials, best, tuple(cps), space, base_cfg)
