"""Tests for Adam, Glorot initialization and the seeded random streams."""

import numpy as np
import pytest

from acmlab.engine.optim import AdamState, adam_step, derive_seed, glorot_init, make_rng
from acmlab.errors import ConfigError, ShapeMismatch


def test_zero_gradient_leaves_params_unchanged():
    params = {"w": np.array([[1.0, -2.0]])}
    adam_step(params, {"w": np.zeros((1, 2))}, AdamState(lr=0.1))
    assert params["w"].tolist() == [[1.0, -2.0]]


def test_zero_learning_rate():
    params = {"w": np.array([[0.5]])}
    state = AdamState(lr=0.0)
    for _ in range(3):
        adam_step(params, {"w": np.array([[0.7]])}, state)
    assert params["w"].tolist() == [[0.5]]
    assert state.t == 3


def test_first_step_moves_by_lr():
    params = {"w": np.array([[0.0]])}
    adam_step(params, {"w": np.array([[0.2]])}, AdamState(lr=1e-2, eps=1e-8))
    assert params["w"][0, 0] == pytest.approx(-1e-2 * 0.2 / (0.2 + 1e-8), rel=1e-12)


def test_weight_decay_is_added_to_the_gradient():
    params = {"w": np.array([[1.0]]), "b": np.array([[1.0]])}
    state = AdamState(lr=0.1, weight_decay=0.5)
    adam_step(params, {"w": np.zeros((1, 1)), "b": np.zeros((1, 1))}, state, decay={"w"})
    assert params["w"][0, 0] < 1.0
    assert params["b"][0, 0] == 1.0


def test_adam_shape_errors():
    with pytest.raises(ShapeMismatch):
        adam_step({"w": np.zeros((2, 2))}, {}, AdamState(lr=0.1))
    with pytest.raises(ShapeMismatch):
        adam_step({"w": np.zeros((2, 2))}, {"w": np.zeros((2, 1))}, AdamState(lr=0.1))
    with pytest.raises(ConfigError):
        AdamState(lr=-1.0)


def test_adam_minimises_a_quadratic():
    target = np.array([[3.0, -1.0]])
    params = {"w": np.zeros((1, 2))}
    state = AdamState(lr=0.05)
    for _ in range(2000):
        adam_step(params, {"w": 2.0 * (params["w"] - target)}, state)
    assert np.allclose(params["w"], target, atol=1e-3)


def test_glorot_is_deterministic_and_bounded():
    a = glorot_init(100, 1000, seed=7)
    assert np.array_equal(a, glorot_init(100, 1000, seed=7))
    assert not np.array_equal(a, glorot_init(100, 1000, seed=8))
    s = np.sqrt(6.0 / 1100)
    assert np.abs(a).max() <= s
    # 3 standard errors of the mean of 10^5 Uniform(-s, s) draws.
    assert abs(a.mean()) < 3 * s / np.sqrt(3 * 10**5)


def test_glorot_rejects_empty_shapes():
    with pytest.raises(ShapeMismatch):
        glorot_init(0, 3, seed=0)


def test_streams_are_reproducible_and_distinct():
    assert make_rng(1, "epoch", 3).random() == make_rng(1, "epoch", 3).random()
    assert make_rng(1, "epoch", 3).random() != make_rng(1, "epoch", 4).random()
    assert make_rng(1).random() != make_rng(2).random()
    assert derive_seed(5, "x") == derive_seed(5, "x")
    assert 0 <= derive_seed(5, "x") < 2**63 - 1
