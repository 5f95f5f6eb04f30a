"""Tests for the reverse-mode tape: op values, backward sweeps and finite-difference checks."""

import math

import numpy as np
import pytest

from acmlab.engine.autodiff import OpKind, Tape
from acmlab.engine.gradcheck import check_gradients, numerical_gradient
from acmlab.engine.graph import AggregatorKind, make_aggregator
from acmlab.engine.manifold import ManifoldSpec, project_pu
from acmlab.errors import NonScalarLoss, ShapeMismatch, UnknownOp
from acmlab.models.gnn import gcn_acm_layer, gcn_acm_layer_tape
from acmlab.utils.synthetic import random_connected_graph

SEEDS = range(20)


def _weighted_sum(tape, node, seed):
    """sum(node * C) for a fixed random C, so every output entry gets its own weight."""
    weights = np.random.default_rng(10_000 + seed).standard_normal(node.shape)
    return tape.sum(tape.mul(node, tape.constant(weights)))


def _pattern(g):
    a = g.augmented_adjacency()
    rows = np.repeat(np.arange(g.n_nodes), np.diff(a.indptr))
    return a.indptr.copy(), a.indices.copy(), rows


def _assert_grads(build, inputs):
    result = check_gradients(build, inputs)
    assert result.passed, result


# --- forward values -------------------------------------------------------------

def test_tanh_of_zero():
    tape = Tape()
    assert tape.tanh(tape.constant([[0.0]])).value.tolist() == [[0.0]]


def test_matmul_by_identity():
    tape = Tape()
    H = np.arange(6.0).reshape(3, 2)
    assert np.array_equal(tape.matmul(tape.constant(H), tape.constant(np.eye(2))).value, H)


@pytest.mark.parametrize("n_classes", [2, 3, 7])
def test_uniform_nll_is_log_c(n_classes):
    tape = Tape()
    logp = tape.log_softmax_rows(tape.constant(np.zeros((1, n_classes))))
    loss = tape.masked_nll(logp, [n_classes - 1], [True])
    assert loss.value[0, 0] == pytest.approx(math.log(n_classes), abs=1e-14)


def test_forward_dispatch_and_errors():
    tape = Tape()
    a = tape.forward(OpKind.CONSTANT, value=np.ones((2, 3)))
    b = tape.forward("parameter", name="w", value=np.ones((3, 1)))
    assert tape.forward("matmul", a, b).value.tolist() == [[3.0], [3.0]]
    assert tape.parameter_ids == {b.id}
    with pytest.raises(UnknownOp):
        tape.forward("convolve", a)
    with pytest.raises(ShapeMismatch):
        tape.matmul(a, a)
    with pytest.raises(ShapeMismatch):
        tape.add(a, b)
    with pytest.raises(ShapeMismatch):
        Tape().matmul(a, b)


def test_masked_nll_rejects_empty_mask():
    tape = Tape()
    with pytest.raises(ShapeMismatch):
        tape.masked_nll(tape.constant(np.zeros((2, 2))), [0, 1], [False, False])


def test_node_ids_are_topological():
    tape = Tape()
    x = tape.parameter("x", np.ones((2, 2)))
    y = tape.tanh(tape.add(x, tape.scale(x, 2.0)))
    tape.sum(y)
    for node in tape.nodes:
        assert all(pid < node.id for pid in node.parent_ids)


# --- backward -----------------------------------------------------------------

def test_square_gradient():
    tape = Tape()
    x = tape.parameter("x", [[3.0]])
    grads = tape.backward(tape.sum(tape.mul(x, x)))
    assert grads["x"].tolist() == [[6.0]]


def test_project_pu_gradient_hand_value():
    tape = Tape()
    x = tape.parameter("x", [[1.0, 0.0]])
    loss = tape.sum(tape.row_project_pu(x, tape.constant(np.ones((1, 2)))))
    assert np.allclose(tape.backward(loss)["x"], [[0.0, 1.0]], atol=1e-15)


def test_non_scalar_loss():
    tape = Tape()
    x = tape.parameter("x", np.ones((2, 2)))
    with pytest.raises(NonScalarLoss):
        tape.backward(tape.tanh(x))


def test_shared_parent_accumulates():
    value = np.random.default_rng(0).standard_normal((3, 4))

    tape = Tape()
    x = tape.parameter("x", value)
    t = tape.tanh(x)
    shared = tape.backward(tape.sum(tape.add(tape.mul(t, x), tape.mul(t, x))))["x"]

    tape = Tape()
    x = tape.parameter("x", value)
    single = tape.backward(tape.sum(tape.scale(tape.mul(tape.tanh(x), x), 2.0)))["x"]
    assert np.allclose(shared, single, atol=1e-14)


def test_unused_parameter_gets_zero_gradient():
    tape = Tape()
    x = tape.parameter("x", np.ones((1, 2)))
    tape.parameter("unused", np.ones((2, 2)))
    grads = tape.backward(tape.sum(x))
    assert grads["unused"].tolist() == [[0.0, 0.0], [0.0, 0.0]]


def test_gradients_reset_between_sweeps():
    tape = Tape()
    x = tape.parameter("x", [[2.0]])
    loss = tape.sum(tape.mul(x, x))
    first = tape.backward(loss)["x"].copy()
    assert np.array_equal(tape.backward(loss)["x"], first)


def test_dropout_eval_is_identity_and_train_preserves_expectation():
    tape = Tape()
    ones = tape.constant(np.ones((1, 100_000)))
    assert np.array_equal(tape.dropout(ones, 0.2, seed=1, train=False).value, ones.value)
    dropped = tape.dropout(ones, 0.2, seed=1, train=True).value
    assert set(np.unique(dropped)) <= {0.0, 1.25}
    assert abs(dropped.mean() - 1.0) < 0.01


# --- finite differences ---------------------------------------------------------

def test_numerical_gradient_of_square():
    grad = numerical_gradient(lambda x: float((x ** 2).sum()), np.array([[1.0, -2.0]]))
    assert np.allclose(grad, [[2.0, -4.0]], atol=1e-8)


@pytest.mark.parametrize("seed", SEEDS)
def test_elementwise_gradients(seed):
    rng = np.random.default_rng(seed)
    inputs = {"a": rng.standard_normal((3, 4)), "b": rng.standard_normal((3, 4))}

    _assert_grads(lambda t, n: _weighted_sum(t, t.mul(n["a"], n["b"]), seed), inputs)
    _assert_grads(lambda t, n: _weighted_sum(t, t.add(n["a"], t.scale(n["b"], -1.5)), seed), inputs)
    _assert_grads(lambda t, n: _weighted_sum(t, t.tanh(n["a"]), seed), inputs)
    _assert_grads(lambda t, n: _weighted_sum(t, t.leaky_relu(n["a"], 0.2), seed), inputs)
    _assert_grads(lambda t, n: _weighted_sum(t, t.softplus(n["a"], 1e-4), seed), inputs)
    _assert_grads(lambda t, n: _weighted_sum(t, t.dropout(n["a"], 0.5, seed, True), seed), inputs)


@pytest.mark.parametrize("seed", SEEDS)
def test_matmul_gradient(seed):
    rng = np.random.default_rng(seed)
    inputs = {"a": rng.standard_normal((3, 4)), "b": rng.standard_normal((4, 2))}
    _assert_grads(lambda t, n: _weighted_sum(t, t.tanh(t.matmul(n["a"], n["b"])), seed), inputs)


@pytest.mark.parametrize("seed", SEEDS)
def test_sparse_gradients(seed):
    rng = np.random.default_rng(seed)
    g = random_connected_graph(6, seed=seed)
    matrix = make_aggregator(g, AggregatorKind.SYM_NORM, 0.8).matrix
    indptr, cols, rows = _pattern(g)
    inputs = {
        "h": rng.standard_normal((6, 3)),
        "vals": rng.uniform(0.1, 1.0, size=(len(cols), 1)),
    }
    _assert_grads(lambda t, n: _weighted_sum(t, t.spmm_const(matrix, n["h"]), seed), {"h": inputs["h"]})
    _assert_grads(
        lambda t, n: _weighted_sum(t, t.spmm_values(n["vals"], n["h"], indptr, cols, rows), seed),
        inputs,
    )


@pytest.mark.parametrize("seed", SEEDS)
def test_attention_weights_gradient(seed):
    rng = np.random.default_rng(seed)
    g = random_connected_graph(7, seed=seed)
    indptr, cols, rows = _pattern(g)
    inputs = {"src": rng.standard_normal((7, 1)), "dst": rng.standard_normal((7, 1))}
    _assert_grads(
        lambda t, n: _weighted_sum(
            t, t.attention_weights(n["src"], n["dst"], indptr, cols, rows, alpha=0.2), seed
        ),
        inputs,
    )


@pytest.mark.parametrize("seed", SEEDS)
def test_classifier_head_gradient(seed):
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 4, size=5)
    mask = np.array([True, False, True, True, False])
    _assert_grads(
        lambda t, n: t.masked_nll(t.log_softmax_rows(n["a"]), labels, mask),
        {"a": rng.standard_normal((5, 4))},
    )


@pytest.mark.parametrize("seed", SEEDS)
def test_manifold_op_gradients(seed):
    rng = np.random.default_rng(seed)
    u = rng.uniform(0.5, 2.0, size=(1, 4))
    a0 = u[0, 0] ** -0.5

    h = rng.standard_normal((3, 4))
    _assert_grads(
        lambda t, n: _weighted_sum(t, t.row_project_pu(n["h"], n["u"]), seed), {"h": h, "u": u}
    )

    w = rng.standard_normal((3, 4))
    w[:, 0] = a0 - rng.uniform(0.2, 2.0, size=3)
    _assert_grads(
        lambda t, n: _weighted_sum(t, t.row_push_forward(n["w"], n["u"], b=0.0), seed),
        {"w": w, "u": u},
    )

    v = rng.standard_normal((3, 4))
    v[:, 1] += 0.5
    _assert_grads(
        lambda t, n: _weighted_sum(t, t.row_push_back(n["v"], n["u"]), seed), {"v": v, "u": u}
    )


@pytest.mark.parametrize("seed", SEEDS)
def test_acm_gcn_layer_gradient(seed):
    rng = np.random.default_rng(seed)
    g = random_connected_graph(5, seed=seed)
    matrix = make_aggregator(g, AggregatorKind.SYM_NORM, 1.0).matrix
    u_in = rng.uniform(0.5, 2.0, size=(1, 3))
    m = ManifoldSpec(u_diag=u_in[0])
    inputs = {
        "H": project_pu(rng.standard_normal((5, 3)), m),
        "W": rng.standard_normal((3, 3)) * 0.5,
        "u_in": u_in,
        "u_out": rng.uniform(0.5, 2.0, size=(1, 3)),
    }

    def build(t, n):
        out = gcn_acm_layer_tape(t, matrix, n["H"], n["W"], n["u_in"], n["u_out"])
        return _weighted_sum(t, out, seed)

    _assert_grads(build, inputs)


def test_tape_layer_matches_numpy_layer():
    rng = np.random.default_rng(5)
    g = random_connected_graph(6, seed=5)
    m = ManifoldSpec(u_diag=[1.5, 0.7])
    H = project_pu(rng.standard_normal((6, 2)), m)
    W = rng.standard_normal((2, 2))
    tape = Tape()
    u = tape.constant(m.u_diag[None, :])
    out = gcn_acm_layer_tape(
        tape, make_aggregator(g, AggregatorKind.SYM_NORM, 1.0).matrix,
        tape.constant(H), tape.constant(W), u, u,
    )
    assert np.abs(out.value - gcn_acm_layer(g, H, W, m)).max() < 1e-12
