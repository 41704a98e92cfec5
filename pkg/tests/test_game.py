import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from skewflow.errors import DimensionError, DomainError, UnsupportedError
from skewflow.game import (
    JointState,
    duality_gap,
    lift_state,
    make_game,
    singular_value_range,
    symmetric_spectrum,
)
from skewflow.mirror_maps import make_map


def entropy_game(A):
    A = np.asarray(A, dtype=float)
    return make_game(A, make_map("entropy", dim=A.shape[0]), make_map("entropy", dim=A.shape[1]))


def simplex_grid(dim, n):
    """All points of the simplex with coordinates in multiples of 1/n."""
    pts = []
    for c in itertools.product(range(n + 1), repeat=dim - 1):
        if sum(c) <= n:
            pts.append(list(c) + [n - sum(c)])
    return np.array(pts, dtype=float) / n


@pytest.mark.parametrize(
    "A,expected",
    [
        ([[1, -1], [-1, 1]], (2.0, 0.0)),
        ([[1, 0], [0, 1]], (1.0, 1.0)),
        ([[2]], (2.0, 2.0)),
        ([[2, 0], [0, 1]], (2.0, 1.0)),
        ([[1, 2, 3]], (math.sqrt(14), 0.0)),
    ],
)
def test_singular_value_examples(A, expected):
    amax, amin = singular_value_range(np.array(A, dtype=float))
    assert amax == pytest.approx(expected[0], rel=1e-10)
    assert amin == pytest.approx(expected[1], abs=1e-10)


def test_make_game_presets_and_errors():
    g = make_game("matching_pennies", make_map("entropy", dim=2), make_map("entropy", dim=2))
    assert (g.alpha_max, g.alpha_min) == pytest.approx((2.0, 0.0), abs=1e-10)
    assert make_game("scalar1", make_map("euclidean"), make_map("euclidean")).alpha_max == pytest.approx(1.0)
    with pytest.raises(DimensionError):
        make_game([[1, 2]], make_map("entropy", dim=2), make_map("entropy", dim=3))
    with pytest.raises(DimensionError):
        make_game("nope", make_map("euclidean"), make_map("euclidean"))
    with pytest.raises(ValueError):
        g.payoff[0, 0] = 5.0


@given(arrays(np.float64, st.tuples(st.integers(1, 4), st.integers(1, 4)), elements=st.floats(-5, 5)))
def test_alpha_matches_eigh(A):
    amax, amin = singular_value_range(A)
    eig = np.linalg.eigvalsh(A.T @ A)
    top = math.sqrt(max(eig[-1], 0.0))
    assert amax == pytest.approx(top, rel=1e-8, abs=1e-9)
    assert amax >= amin >= 0


def test_spectrum_handles_null_start():
    # A^T A kills the all-ones start vector
    vals = symmetric_spectrum(np.array([[2.0, -2.0], [-2.0, 2.0]]))
    np.testing.assert_allclose(vals, [4.0, 0.0], atol=1e-10)


def test_alpha_bounds_action(rng):
    A = rng.normal(size=(3, 4))
    amax, _ = singular_value_range(A)
    for _ in range(1000):
        v = rng.normal(size=4)
        assert np.linalg.norm(A @ v) <= amax * np.linalg.norm(v) * (1 + 1e-10)


def test_duality_gap_examples():
    g = entropy_game([[1, -1], [-1, 1]])
    assert duality_gap(g, [0.5, 0.5], [0.5, 0.5]) == 0.0
    assert duality_gap(g, [1.0, 0.0], [1.0, 0.0]) == pytest.approx(2.0)
    rps = entropy_game([[0, 1, -1], [-1, 0, 1], [1, -1, 0]])
    assert duality_gap(rps, [1 / 3] * 3, [1 / 3] * 3) == pytest.approx(0.0, abs=1e-15)


def test_duality_gap_unbounded():
    g = make_game([[1.0]], make_map("euclidean"), make_map("euclidean"))
    with pytest.raises(UnsupportedError):
        duality_gap(g, [0.0], [0.0])


def test_duality_gap_nonnegative(rng):
    g = entropy_game(rng.normal(size=(3, 3)))
    for _ in range(1000):
        assert duality_gap(g, rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(3))) >= -1e-12


@pytest.mark.parametrize("dim,n", [(2, 9999), (3, 140)])
def test_duality_gap_matches_grid(dim, n, rng):
    grid = simplex_grid(dim, n)
    assert len(grid) >= 10_000
    for _ in range(5):
        A = rng.normal(size=(dim, dim))
        g = entropy_game(A)
        p, q = rng.dirichlet(np.ones(dim)), rng.dirichlet(np.ones(dim))
        brute = np.max(grid @ (A.T @ p)) - np.min(grid @ (A @ q))
        assert duality_gap(g, p, q) == pytest.approx(brute, abs=1e-9)


def test_lift_state_examples():
    quad = make_game([[1.0]], make_map("euclidean"), make_map("euclidean"))
    s = lift_state(quad, [3.0], [3.0])
    np.testing.assert_allclose(s.x, [3.0]) and np.testing.assert_allclose(s.y, [3.0])
    g = entropy_game(np.eye(2))
    s = lift_state(g, [0.5, 0.5], [0.25, 0.75])
    np.testing.assert_allclose(s.x, [-math.log(2)] * 2)
    np.testing.assert_allclose(g.map_q.dual_gradient(s.y), [0.25, 0.75], atol=1e-12)
    np.testing.assert_allclose(s.z, np.concatenate([s.x, s.y]))
    with pytest.raises(DomainError):
        lift_state(g, [1.0, 0.0], [0.5, 0.5])


def test_joint_state_from_dual_keeps_pair_in_sync(rng):
    g = entropy_game(rng.normal(size=(2, 3)))
    s = JointState.from_dual(g, rng.normal(size=2), rng.normal(size=3))
    np.testing.assert_allclose(s.p, g.map_p.dual_gradient(s.x), atol=1e-10)
    with pytest.raises(DimensionError):
        JointState.from_dual(g, [0.0], [0.0, 0.0, 0.0])
