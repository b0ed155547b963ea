"""Acceptance criteria, each at its stated tolerance.

Every test appends one PASS/FAIL line that is printed in the terminal summary.
The long training runs are shared through a module-level cache; the whole
file takes a few minutes on one core.
"""
import csv
from dataclasses import replace
import functools
import io
import math

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from pinnlab.autodiff import (
    ELU,
    GELU,
    ReLU,
    Sigmoid,
    Tanh,
    activation_derivs,
    activation_eval,
    central_difference,
    grad_params,
)
from pinnlab.config import load_config
from pinnlab.hypertune import SearchSpace, run_search
from pinnlab.network import LayerSpec, param_count, unflatten, zero_params
from pinnlab.problem import exact_residual, validate_mae
from pinnlab.training import loss, train

SEEDS = (0, 1, 2)


def record(number, text, ok, detail=""):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {text}"
                            + (f" ({detail})" if detail else ""))
    assert ok, detail


@functools.lru_cache(maxsize=None)
def paper_run(kind, seed):
    cfg = replace(load_config(f"paper_{kind}", env={}).train, seed=seed)
    return train(cfg)


def median_mae(kind, epoch):
    return float(np.median([paper_run(kind, s).mae_at[epoch] for s in SEEDS]))


def test_criterion_1_parameter_count():
    n = param_count(LayerSpec.uniform([2, 30, 1], "tanh"))
    record(1, "param_count([2,30,1]) == 121", n == 121, f"got {n}")


def test_criterion_2_autodiff_suite():
    rng = np.random.default_rng(2)
    worst_deriv = 0.0
    h = 1e-5
    for act in (Sigmoid(), Tanh(), ReLU(), ELU(), GELU()):
        z = rng.uniform(-5, 5, 1000)
        if act.kind in ("relu", "elu"):
            # a central difference straddling the kink is not a derivative estimate
            z = np.where(np.abs(z) < 2 * h, z + 4 * h, z)
        vals = activation_derivs(act, z, 2)
        plus, minus = activation_derivs(act, z + h, 1), activation_derivs(act, z - h, 1)
        for k in range(2):
            fd = (plus[k] - minus[k]) / (2 * h)
            rel = np.abs(vals[k + 1] - fd) / np.maximum(np.abs(fd), 1e-3)
            worst_deriv = max(worst_deriv, float(rel.max()))

    z = rng.uniform(-10, 10, 1000)
    ident = np.abs(activation_eval(Tanh(), z)[0]
                   - (activation_eval(Sigmoid(), 2 * z)[0] - activation_eval(Sigmoid(), -2 * z)[0]))
    worst_ident = float(ident.max())

    worst_grad = 0.0
    for kind in ("sigmoid", "tanh", "relu", "elu", "gelu"):
        spec = LayerSpec.uniform([2, 30, 1], kind, linear_output=True)
        p = unflatten(spec, rng.normal(scale=0.5, size=param_count(spec)))
        batch = rng.random((10, 2))
        g = grad_params(lambda q: loss(spec, q, batch), p)
        fd = central_difference(lambda v: float(loss(spec, unflatten(spec, v), batch)),
                                p.flatten())
        mask = np.abs(g) > 1e-8
        worst_grad = max(worst_grad, float(np.max(np.abs(g[mask] - fd[mask]) / np.abs(g[mask]))))

    ok = worst_deriv <= 1e-5 and worst_ident <= 1e-12 and worst_grad <= 1e-4
    record(2, "activation derivatives, tanh/sigmoid identity, grad_params vs FD", ok,
           f"deriv rel {worst_deriv:.2e}, identity {worst_ident:.2e}, grad rel {worst_grad:.2e}")


def test_criterion_3_exact_residual():
    pts = np.random.default_rng(3).random((10_000, 2))
    worst = float(np.max(np.abs(exact_residual((pts[:, 0], pts[:, 1])).residual)))
    record(3, "exact solution residual <= 1e-9 at 1e4 points", worst <= 1e-9, f"max {worst:.2e}")


def test_criterion_4_zero_network_mae():
    spec = LayerSpec.uniform([2, 30, 1], "tanh")
    mae = validate_mae(spec, zero_params(spec), 100)
    record(4, "zero-network MAE within 0.002 of 0.1061", abs(mae - 0.1061) <= 0.002,
           f"MAE {mae:.5f}")


@pytest.mark.slow
def test_criterion_5_tanh_band():
    m10, m50 = median_mae("tanh", 10000), median_mae("tanh", 50000)
    record(5, "tanh lr 3.2040e-4: median MAE@10k <= 1e-3 and MAE@50k <= 5e-4",
           m10 <= 1e-3 and m50 <= 5e-4, f"MAE@10k {m10:.3e}, MAE@50k {m50:.3e}")


@pytest.mark.slow
def test_criterion_6_gelu_band():
    m10, m50 = median_mae("gelu", 10000), median_mae("gelu", 50000)
    record(6, "GELU lr 1.1891e-4: median MAE@50k <= 5e-4 and below MAE@10k",
           m50 <= 5e-4 and m50 < m10, f"MAE@10k {m10:.3e}, MAE@50k {m50:.3e}")


@pytest.mark.slow
def test_criterion_7_activation_ordering():
    med = {k: median_mae(k, 50000) for k in ("tanh", "gelu", "elu", "relu")}
    ok = med["relu"] >= 10 * med["tanh"] and med["gelu"] < med["elu"] and med["tanh"] < med["elu"]
    record(7, "ReLU >= 10x tanh; GELU and tanh below ELU (median MAE@50k)", ok,
           ", ".join(f"{k} {v:.3e}" for k, v in med.items()))


@pytest.mark.slow
def test_criterion_8_hypertune_smoke():
    base = replace(load_config("paper_tanh", env={}).train, epochs_max=2000,
                   mae_checkpoints=(2000,))
    rep = run_search(SearchSpace(((1e-5, 1e-3),), 5), base, ["tanh"])
    rows = list(csv.reader(io.StringIO(rep.trials_csv())))
    header_ok = rows[0] == ["activation", "learning_rate", "mae_2000", "final_loss", "seed"]
    rows_ok = len(rows) == 6 and all(len(r) == 5 and math.isfinite(float(r[2])) for r in rows[1:])
    best = rep.best_per_activation["tanh"]
    argmin_ok = best["mae_at"][2000] == min(t.mae_at[2000] for t in rep.trials)
    ok = len(rep.trials) == 5 and header_ok and rows_ok and argmin_ok
    record(8, "grid [1e-5, 1e-3] x 5, tanh, 2000 epochs: 5 trials, argmin selection", ok,
           f"best lr {best['learning_rate']:.4e}, MAE {best['mae_at'][2000]:.3e}")


@pytest.mark.slow
def test_criterion_9_determinism():
    first = paper_run("tanh", SEEDS[0]).loss_csv()
    again = train(replace(load_config("paper_tanh", env={}).train, seed=SEEDS[0])).loss_csv()
    record(9, "two tanh seed-0 runs give byte-identical loss.csv",
           first.encode() == again.encode(), f"{len(first.splitlines()) - 1} epochs")
