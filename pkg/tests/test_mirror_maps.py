import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from skewflow.errors import DimensionError, DomainError, UnsupportedError
from skewflow.mirror_maps import MapKind, clamp_counter, make_map

finite = st.floats(-20, 20, allow_nan=False)
KINDS_DIMS = [("euclidean", 3), ("entropy", 3), ("logcosh", 1), ("cubic", 1)]


def softmax_oracle(x):
    e = [math.exp(v) for v in x]
    s = sum(e)
    return [v / s for v in e]


def kl_oracle(p, r):
    return sum(a * math.log(a / b) for a, b in zip(p, r))


# worked examples -------------------------------------------------------


def test_primal_value_examples():
    assert make_map("euclidean").primal_value([3.0]) == pytest.approx(4.5)
    ent = make_map("entropy", dim=2)
    assert ent.primal_value([0.5, 0.5]) == pytest.approx(-math.log(2), abs=1e-12)
    assert ent.primal_value([1 - 1e-12, 1e-12]) == pytest.approx(0.0, abs=1e-10)


def test_primal_value_errors():
    with pytest.raises(DomainError):
        make_map("entropy", dim=2).primal_value([1.0, 0.0])
    with pytest.raises(DomainError):
        make_map("entropy", dim=2).primal_value([-0.1, 1.1])
    with pytest.raises(UnsupportedError):
        make_map("cubic").primal_value([0.2])


def test_dual_value_examples():
    assert make_map("entropy", dim=2).dual_value([0.0, 0.0]) == pytest.approx(math.log(2), abs=1e-14)
    assert make_map("logcosh").dual_value([3.0]) == pytest.approx(math.log(math.cosh(3.0)), abs=1e-13)
    assert make_map("logcosh").dual_value([3.0]) == pytest.approx(2.309329, abs=1e-6)
    assert make_map("euclidean").dual_value([3.0]) == pytest.approx(4.5)
    assert make_map("cubic").dual_value([-3.0]) == pytest.approx(9.0)


def test_dual_gradient_examples():
    ent = make_map("entropy", dim=2)
    np.testing.assert_allclose(ent.dual_gradient([0.0, 0.0]), [0.5, 0.5], atol=1e-15)
    x = [math.log(0.5) - 0.5, math.log(0.5)]
    np.testing.assert_allclose(ent.dual_gradient(x), softmax_oracle(x), atol=1e-15)
    np.testing.assert_allclose(ent.dual_gradient(x), [0.377541, 0.622459], atol=1e-6)
    assert make_map("logcosh").dual_gradient([0.0])[0] == 0.0
    np.testing.assert_allclose(make_map("cubic").dual_gradient([-2.0]), [-4.0])


def test_softmax_is_overflow_safe():
    p = make_map("entropy", dim=3).dual_gradient([1000.0, 999.0, -1000.0])
    assert np.all(np.isfinite(p)) and p.sum() == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(p[:2], softmax_oracle([1.0, 0.0, -2000.0])[:2], rtol=1e-12)


def test_primal_gradient_examples():
    np.testing.assert_allclose(make_map("euclidean").primal_gradient([3.0]), [3.0])
    np.testing.assert_allclose(make_map("entropy", dim=2).primal_gradient([0.5, 0.5]), [-math.log(2)] * 2)
    assert make_map("logcosh").primal_gradient([0.9])[0] == pytest.approx(1.472219, abs=1e-6)
    with pytest.raises(DomainError):
        make_map("logcosh").primal_gradient([1.0])
    np.testing.assert_allclose(make_map("cubic").primal_gradient([-4.0]), [-2.0])


def test_bregman_examples():
    assert make_map("euclidean", dim=2).bregman_primal([1, 0], [0, 1]) == pytest.approx(1.0)
    ent = make_map("entropy", dim=2)
    assert ent.bregman_primal([0.5, 0.5], [0.25, 0.75]) == pytest.approx(kl_oracle([0.5, 0.5], [0.25, 0.75]))
    assert ent.bregman_primal([0.5, 0.5], [0.25, 0.75]) == pytest.approx(0.143841, abs=1e-6)
    assert ent.bregman_primal([0.3, 0.7], [0.3, 0.7]) == 0.0
    assert make_map("euclidean").bregman_dual([2.0], [0.0]) == pytest.approx(2.0)
    assert make_map("logcosh").bregman_dual([0.4], [0.4]) == 0.0
    with pytest.raises(DomainError):
        ent.bregman_primal([1.0, 0.0], [0.5, 0.5])


def test_duality_identity_entropy_example():
    ent = make_map("entropy", dim=2)
    lhs = ent.bregman_dual([0.0, 0.0], [1.0, 0.0])
    rhs = kl_oracle(softmax_oracle([1.0, 0.0]), [0.5, 0.5])
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        make_map("entropy", dim=3).dual_value([0.0, 0.0])
    with pytest.raises(ValueError):
        make_map("logcosh", dim=2)
    with pytest.raises(ValueError):
        make_map("nope")


def test_clamp_counter_counts_floors():
    clamp_counter.reset()
    ent = make_map("entropy", dim=2)
    ent.primal_gradient([0.5, 0.5])
    assert clamp_counter.count == 0
    ent.primal_gradient([1.0 - 1e-320, 1e-320])
    assert clamp_counter.count == 1


def test_domain_bound_default():
    ent = make_map("entropy", dim=2)
    assert ent.bounded and ent.domain_bound is None
    r = ent.default_domain_bound([0.5, 0.5])
    assert r == pytest.approx(math.log(2), abs=1e-4) and r < math.log(2)
    assert make_map("euclidean").default_domain_bound([0.0]) is None
    assert ent.with_bound(3.0).domain_bound == 3.0


def test_maps_are_values():
    assert make_map("entropy", dim=2) == make_map("entropy", dim=2)
    assert make_map("entropy", dim=2) != make_map("entropy", dim=3)
    assert len({make_map("logcosh"), make_map("logcosh")}) == 1
    assert MapKind("cubic") is MapKind.CUBIC


# properties --------------------------------------------------------------


def test_inverse_pair_random_interior(rng):
    for kind, dim in [("euclidean", 3), ("entropy", 4), ("logcosh", 1), ("cubic", 1)]:
        m = make_map(kind, dim=dim)
        for _ in range(1000):
            if kind == "entropy":
                p = rng.dirichlet(np.ones(dim))
            elif kind == "logcosh":
                p = rng.uniform(-0.999, 0.999, size=1)
            else:
                p = rng.normal(size=dim) * 3
            np.testing.assert_allclose(m.dual_gradient(m.primal_gradient(p)), p, atol=1e-10, rtol=0)


@given(st.lists(finite, min_size=3, max_size=3))
def test_entropy_dual_gradient_on_open_simplex(x):
    p = make_map("entropy", dim=3).dual_gradient(x)
    assert abs(p.sum() - 1.0) <= 1e-12
    assert np.all(p >= 0)


@pytest.mark.parametrize("kind,dim", KINDS_DIMS)
@given(data=st.data())
def test_bregman_dual_nonnegative(kind, dim, data):
    m = make_map(kind, dim=dim)
    x = np.array(data.draw(st.lists(st.floats(-8, 8), min_size=dim, max_size=dim)))
    y = np.array(data.draw(st.lists(st.floats(-8, 8), min_size=dim, max_size=dim)))
    scale = max(1.0, float(m.dual_value(x)), float(m.dual_value(y)))
    assert m.bregman_dual(x, y) >= -1e-12 * scale


@pytest.mark.parametrize("kind,dim", KINDS_DIMS)
def test_gradient_matches_central_differences(kind, dim, rng):
    m = make_map(kind, dim=dim)
    h = 1e-5
    for _ in range(50):
        x = rng.uniform(-4, 4, size=dim)
        g = m.dual_gradient(x)
        fd = np.array([(m.dual_value(x + h * e) - m.dual_value(x - h * e)) / (2 * h) for e in np.eye(dim)])
        np.testing.assert_allclose(fd, g, rtol=1e-6, atol=1e-8)


@pytest.mark.parametrize("kind,dim", [("euclidean", 3), ("entropy", 3), ("logcosh", 1)])
def test_duality_identity(kind, dim, rng):
    m = make_map(kind, dim=dim)
    for _ in range(200):
        x, x_ref = rng.uniform(-3, 3, size=(2, dim))
        lhs = m.bregman_dual(x, x_ref)
        rhs = m.bregman_primal(m.dual_gradient(x_ref), m.dual_gradient(x))
        assert lhs == pytest.approx(rhs, abs=1e-10)


@pytest.mark.parametrize("kind,dim", [("euclidean", 2), ("entropy", 3), ("logcosh", 1), ("cubic", 1)])
def test_fenchel_gap_matches_dual_bregman(kind, dim, rng):
    m = make_map(kind, dim=dim)
    for _ in range(100):
        x, x_ref = rng.uniform(-3, 3, size=(2, dim))
        gap = m.fenchel_gap(x, m.dual_gradient(x_ref))
        assert gap == pytest.approx(m.bregman_dual(x, x_ref), abs=1e-9)


def test_fenchel_gap_finite_at_vertices():
    ent = make_map("entropy", dim=3)
    x = np.array([0.3, -1.0, 2.0])
    for v in ent.vertices():
        # D_phi(v, softmax(x)) = -log softmax(x)_i
        i = int(np.argmax(v))
        assert ent.fenchel_gap(x, v) == pytest.approx(-math.log(softmax_oracle(x)[i]), abs=1e-12)
    lc = make_map("logcosh")
    assert lc.fenchel_gap([0.5], [1.0]) == pytest.approx(math.log(math.cosh(0.5)) + math.log(2) - 0.5 + 0.0, abs=1e-12)
