import json

import numpy as np
import pytest

from pinnlab.autodiff import central_difference, grad_params
from pinnlab.network import ConfigError, LayerSpec, init_params, unflatten, zero_params
from pinnlab.training import (
    SGD,
    Adam,
    AdamState,
    StopReason,
    TrainConfig,
    TrainingDiverged,
    TrainReport,
    adam_step,
    loss,
    loss_and_grad,
    sample_batch,
    sgd_step,
    train,
)

from conftest import random_params

# (pi^2/4 + 7/4)^2, the squared residual of the zero network at the centre
ZERO_NET_LOSS_AT_CENTRE = 17.786472040578341

KINDS = ["sigmoid", "tanh", "relu", "elu", "gelu"]


def small_config(**kw):
    base = dict(spec=LayerSpec.uniform([2, 30, 1], "tanh", linear_output=True), seed=0,
                learning_rate=1e-3, epochs_max=20, batch_size=16, mae_checkpoints=(10, 20),
                validation_grid=20)
    base.update(kw)
    return TrainConfig(**base)


def test_sample_batch_shape_and_range(rng):
    b = sample_batch(rng, 50)
    assert b.shape == (50, 2)
    assert np.all((b >= 0) & (b < 1))


def test_sample_batch_noise_stays_in_square(rng):
    b = sample_batch(rng, 2000, noise=1.0, stddev=0.5)
    assert np.all((b >= 0) & (b <= 1))
    assert np.any(b == 0.0) and np.any(b == 1.0)


def test_noise_does_not_shift_the_random_stream():
    a = np.random.default_rng(3)
    b = np.random.default_rng(3)
    sample_batch(a, 10)
    sample_batch(b, 10, noise=0.5, stddev=0.1)
    assert a.random() == b.random()


def test_sample_batch_rejects_empty(rng):
    with pytest.raises(ValueError):
        sample_batch(rng, 0)


def test_zero_network_loss_at_centre(paper_spec):
    val = loss(paper_spec, zero_params(paper_spec), [[0.5, 0.5]])
    assert val == pytest.approx(ZERO_NET_LOSS_AT_CENTRE, rel=1e-13)
    fused, _ = loss_and_grad(paper_spec, zero_params(paper_spec), np.array([[0.5, 0.5]]))
    assert fused == pytest.approx(ZERO_NET_LOSS_AT_CENTRE, rel=1e-13)


def test_loss_is_mean_of_squares(paper_spec):
    p = zero_params(paper_spec)
    one = loss(paper_spec, p, [[0.5, 0.5]])
    assert loss(paper_spec, p, [[0.5, 0.5], [0.5, 0.5]]) == pytest.approx(one, rel=1e-15)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("linear_output", [False, True])
def test_fused_gradient_matches_tape_and_fd(kind, linear_output, rng):
    spec = LayerSpec.uniform([2, 7, 5, 1], kind, linear_output)
    p = random_params(spec, rng)
    p.biases[-1] = p.biases[-1] + 1.0
    batch = rng.random((6, 2))
    value, g = loss_and_grad(spec, p, batch)
    assert value == pytest.approx(float(loss(spec, p, batch)), rel=1e-13)
    tape = grad_params(lambda q: loss(spec, q, batch), p)
    np.testing.assert_allclose(g, tape, rtol=1e-10, atol=1e-12)
    fd = central_difference(lambda v: float(loss(spec, unflatten(spec, v), batch)), p.flatten())
    mask = np.abs(g) > 1e-8
    assert mask.any()
    assert np.max(np.abs(g[mask] - fd[mask]) / np.abs(g[mask])) <= 1e-4


def test_sgd_step_example():
    np.testing.assert_allclose(sgd_step(np.array([1.0, 2.0]), [0.5, -1.0], 0.1), [0.95, 2.1])


def test_sgd_step_keeps_params_shape(paper_spec):
    p = init_params(paper_spec, 0)
    q = sgd_step(p, np.ones(p.size), 0.5)
    np.testing.assert_array_equal(q.flatten(), p.flatten() - 0.5)
    assert [w.shape for w in q.weights] == [w.shape for w in p.weights]


def test_first_adam_step_is_lr_times_sign():
    g = np.array([3.0, -0.2, 1e-3])
    state, p = adam_step(AdamState.zeros(3), np.zeros(3), g, 0.01)
    np.testing.assert_allclose(p, -0.01 * np.sign(g), rtol=1e-5)
    assert state.t == 1


def test_adam_two_steps_by_hand():
    g1, g2 = np.array([1.0]), np.array([-2.0])
    s, p = adam_step(AdamState.zeros(1), np.array([0.0]), g1, 0.1)
    s, p = adam_step(s, p, g2, 0.1)
    m = 0.9 * 0.1 * 1.0 + 0.1 * -2.0
    v = 0.999 * 0.001 * 1.0 + 0.001 * 4.0
    step2 = 0.1 * (m / (1 - 0.81)) / (np.sqrt(v / (1 - 0.999 ** 2)) + 1e-8)
    np.testing.assert_allclose(p, [-0.1 / (1 + 1e-8) - step2], rtol=1e-12)


def test_train_single_epoch():
    r = train(small_config(epochs_max=1, mae_checkpoints=(1,)))
    assert r.epochs_run == 1
    assert r.stop_reason is StopReason.MAX_EPOCHS
    assert list(r.mae_at) == [1]
    assert np.isfinite(r.final_mae) and np.isfinite(r.neumann_mismatch)


def test_large_tolerance_stops_immediately():
    cfg = small_config(tolerance=1e9)
    r = train(cfg)
    assert r.stop_reason is StopReason.TOLERANCE_REACHED
    assert r.epochs_run == 1
    # no step was taken
    np.testing.assert_array_equal(r.final_params.flatten(), init_params(cfg.spec, 0).flatten())


def test_training_is_deterministic():
    a, b = train(small_config()), train(small_config())
    assert a.loss_history == b.loss_history
    assert a.to_json() == b.to_json()
    assert a.loss_csv() == b.loss_csv()
    assert train(small_config(seed=1)).loss_history != a.loss_history


@pytest.mark.parametrize("opt", [SGD(), Adam()])
def test_reports_share_one_shape(opt):
    r = train(small_config(optimizer=opt))
    d = r.to_dict()
    assert set(d) == set(train(small_config()).to_dict())
    assert d["config"]["optimizer"]["name"] == opt.name
    assert sorted(r.mae_at) == [10, 20]
    assert len(r.loss_history) == 20


def test_divergence_raises_with_partial_report():
    calls = []

    def poisoned(spec, p, batch):
        calls.append(1)
        value, g = loss_and_grad(spec, p, batch)
        return (float("nan"), g) if len(calls) == 4 else (value, g)

    with pytest.raises(TrainingDiverged) as info:
        train(small_config(), gradient=poisoned)
    exc = info.value
    assert exc.epoch == 4
    assert exc.last_finite_loss == exc.report.loss_history[-1]
    assert len(exc.report.loss_history) == 3
    diag = exc.diagnostic()
    assert diag["epoch"] == 4
    json.dumps(diag)


def test_huge_sgd_rate_diverges():
    with pytest.raises(TrainingDiverged):
        with np.errstate(all="ignore"):
            train(small_config(optimizer=SGD(), learning_rate=1e6, epochs_max=200,
                               mae_checkpoints=()))


def test_fused_gradient_agrees_with_fd_during_training():
    seen = []

    def checked(spec, p, batch):
        value, g = loss_and_grad(spec, p, batch)
        fd = central_difference(lambda v: float(loss(spec, unflatten(spec, v), batch)),
                                p.flatten())
        seen.append(np.max(np.abs(g - fd)) / np.max(np.abs(fd)))
        return value, g

    train(small_config(epochs_max=5, mae_checkpoints=()), gradient=checked)
    assert len(seen) == 5
    assert max(seen) <= 1e-4


def test_loss_drops_over_training():
    # linear output: an activated output layer cannot represent the solution
    spec = LayerSpec.uniform([2, 30, 1], "tanh", linear_output=True)
    drops = []
    for seed in range(20):
        r = train(TrainConfig(spec=spec, seed=seed, learning_rate=3e-4, epochs_max=2000,
                              mae_checkpoints=(), validation_grid=20))
        first = np.mean(r.loss_history[:10])
        last = np.mean(r.loss_history[-10:])
        drops.append(first / last)
    assert min(drops) >= 10.0


def test_report_json_roundtrip():
    r = train(small_config())
    back = TrainReport.from_dict(json.loads(r.to_json()))
    assert back.to_json() == r.to_json()
    assert back.loss_csv() == r.loss_csv()
    assert back.mae_csv() == r.mae_csv()


def test_csv_layout():
    r = train(small_config())
    lines = r.loss_csv().splitlines()
    assert lines[0] == "epoch,loss" and len(lines) == 21
    assert lines[1].startswith("1,")
    assert float(lines[-1].split(",")[1]) == r.loss_history[-1]
    assert r.mae_csv().splitlines()[0] == "epoch,mae"


@pytest.mark.parametrize("kw, field", [
    (dict(batch_size=0), "batch_size"),
    (dict(epochs_max=0, mae_checkpoints=()), "epochs_max"),
    (dict(learning_rate=0.0), "learning_rate"),
    (dict(noise=1.5), "noise"),
    (dict(stddev=-1.0), "stddev"),
    (dict(tolerance=-1.0), "tolerance"),
    (dict(mae_checkpoints=(20, 10)), "mae_checkpoints"),
    (dict(mae_checkpoints=(30,)), "mae_checkpoints"),
    (dict(validation_grid=1), "validation_grid"),
])
def test_config_validation(kw, field):
    with pytest.raises(ConfigError, match=field):
        small_config(**kw)


def test_config_dict_roundtrip():
    cfg = small_config(optimizer=Adam(beta1=0.8), noise=0.1, stddev=0.02)
    assert TrainConfig.from_dict(cfg.to_dict()) == cfg
