"""Tests for the M_U geometry: P_U, PF, PB and the manifold distance."""

import math

import numpy as np
import pytest

from acmlab.engine.manifold import (
    ManifoldSpec,
    manifold_distance,
    on_manifold,
    pairwise_distances,
    project_pu,
    project_rows_pu,
    push_back,
    push_forward,
    quadratic_form,
)
from acmlab.errors import AtProjectionCenter, ConfigError, NearZeroVector, NotOnManifold

SPHERE = ManifoldSpec.identity(2)


def _random_spec(rng, dim):
    return ManifoldSpec(u_diag=rng.uniform(0.2, 5.0, size=dim))


def test_spec_derives_center():
    m = ManifoldSpec(u_diag=[4.0, 1.0])
    assert m.a0 == 0.5
    assert m.x0.tolist() == [0.5, 0.0]
    assert quadratic_form(m.x0, m) == pytest.approx(1.0, abs=0.0)


@pytest.mark.parametrize("u", [[], [1.0, 0.0], [1.0, -2.0], [np.inf]])
def test_spec_rejects_bad_u(u):
    with pytest.raises(ConfigError):
        ManifoldSpec(u_diag=u)


def test_spec_rejects_hyperplane_through_center():
    with pytest.raises(ConfigError):
        ManifoldSpec(u_diag=[1.0, 1.0], b=1.0)


@pytest.mark.parametrize(
    "u, x, expected",
    [
        ([1.0, 1.0], [3.0, 4.0], [0.6, 0.8]),
        ([4.0, 1.0], [1.0, 0.0], [0.5, 0.0]),
    ],
)
def test_project_pu_examples(u, x, expected):
    assert np.allclose(project_pu(x, ManifoldSpec(u_diag=u)), expected, atol=1e-15)


def test_project_pu_near_zero():
    with pytest.raises(NearZeroVector):
        project_pu([1e-20, 0.0], SPHERE)


def test_project_rows_falls_back_to_center():
    out, n_bad = project_rows_pu([[0.0, 0.0], [0.0, 2.0]], SPHERE)
    assert n_bad == 1
    assert out.tolist() == [[1.0, 0.0], [0.0, 1.0]]


def test_project_pu_lands_on_manifold_and_is_scale_invariant():
    rng = np.random.default_rng(0)
    for dim in (2, 3, 8):
        m = _random_spec(rng, dim)
        X = rng.standard_normal((20_000, dim))
        Y = project_pu(X, m)
        assert np.abs(quadratic_form(Y, m) - 1.0).max() < 1e-12
        k = rng.uniform(1e-3, 1e3, size=(20_000, 1))
        assert np.abs(project_pu(k * X, m) - Y).max() < 1e-12


@pytest.mark.parametrize(
    "w, expected",
    [
        ([-1.0, 0.0], [0.0, 0.0]),
        ([0.0, 1.0], [0.0, 1.0]),
    ],
)
def test_push_forward_examples(w, expected):
    assert np.allclose(push_forward(w, SPHERE), expected, atol=1e-15)


def test_push_forward_at_center():
    with pytest.raises(AtProjectionCenter):
        push_forward([1.0, 0.0], SPHERE)


@pytest.mark.parametrize(
    "v, expected",
    [
        ([0.0, 0.0], [-1.0, 0.0]),
        ([0.0, 1.0], [0.0, 1.0]),
        ([1.0, 5.0], [1.0, 0.0]),
    ],
)
def test_push_back_examples(v, expected):
    assert np.allclose(push_back(v, SPHERE), expected, atol=1e-15)


def test_push_back_at_center():
    with pytest.raises(AtProjectionCenter):
        push_back([1.0, 0.0], SPHERE)


def test_push_forward_lands_on_hyperplane():
    rng = np.random.default_rng(1)
    m = ManifoldSpec(u_diag=[2.0, 0.5, 1.5], b=-0.3)
    W = project_pu(rng.standard_normal((5000, 3)), m)
    W = W[np.abs(W[:, 0] - m.a0) > 1e-3]
    assert np.abs(push_forward(W, m)[:, 0] - m.b).max() < 1e-12


def test_push_back_closure_and_round_trip():
    rng = np.random.default_rng(2)
    for dim in (2, 4):
        m = _random_spec(rng, dim)
        V = 3.0 * rng.standard_normal((20_000, dim))
        assert np.abs(quadratic_form(push_back(V, m), m) - 1.0).max() < 1e-10

        W = project_pu(rng.standard_normal((20_000, dim)), m)
        W = W[np.abs(W[:, 0] - m.a0) > 1e-3]
        assert np.abs(push_back(push_forward(W, m), m) - W).max() < 1e-9


@pytest.mark.parametrize(
    "x, y, expected",
    [
        ([1.0, 0.0], [1.0, 0.0], 0.0),
        ([1.0, 0.0], [0.0, 1.0], math.pi / 2),
        ([1.0, 0.0], [-1.0, 0.0], math.pi),
    ],
)
def test_distance_examples(x, y, expected):
    assert manifold_distance(x, y, SPHERE) == pytest.approx(expected, abs=1e-15)


def test_distance_requires_points_on_manifold():
    with pytest.raises(NotOnManifold):
        manifold_distance([2.0, 0.0], [1.0, 0.0], SPHERE)


def test_distance_metric_axioms():
    rng = np.random.default_rng(3)
    m = ManifoldSpec(u_diag=[0.5, 2.0, 3.0])
    X, Y, Z = (project_pu(rng.standard_normal((10_000, 3)), m) for _ in range(3))
    dxy = manifold_distance(X, Y, m)
    assert np.array_equal(dxy, manifold_distance(Y, X, m))
    assert np.all(manifold_distance(X, X, m) == 0.0)
    assert np.all(dxy <= manifold_distance(X, Z, m) + manifold_distance(Z, Y, m) + 1e-12)


def test_pairwise_matches_rowwise():
    rng = np.random.default_rng(4)
    m = ManifoldSpec(u_diag=[1.0, 3.0])
    H = project_pu(rng.standard_normal((6, 2)), m)
    D = pairwise_distances(H, m)
    assert D.shape == (6, 6)
    assert np.allclose(D[2], manifold_distance(np.tile(H[2], (6, 1)), H, m))
    assert on_manifold(H, m)
