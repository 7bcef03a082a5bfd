import numpy as np
import pytest

from rmhd_ap.core import InvalidArgumentError
from rmhd_ap.decomposition import constraint_norms, decompose, recompose, CellRadiation
from rmhd_ap.quadrature import build_quadrature, moment


def test_two_point_rule():
    q = build_quadrature(2)
    np.testing.assert_allclose(q.nodes, [-1 / np.sqrt(3), 1 / np.sqrt(3)], rtol=1e-15)
    np.testing.assert_allclose(q.weights, [1.0, 1.0], rtol=1e-15)


@pytest.mark.parametrize("order", [2, 4, 8, 16, 32])
def test_matches_numpy_leggauss(order):
    q = build_quadrature(order)
    x, w = np.polynomial.legendre.leggauss(order)
    np.testing.assert_allclose(q.nodes, x, atol=1e-14)
    np.testing.assert_allclose(q.weights, w, atol=1e-14)
    assert np.all(np.diff(q.nodes) > 0)
    assert np.array_equal(q.nodes, -q.nodes[::-1])
    assert np.array_equal(q.weights, q.weights[::-1])


def test_s8_moments(quad8):
    assert quad8.weights.sum() == pytest.approx(2.0, abs=1e-14)
    one = np.ones(8)
    assert moment(one, 0, quad8) == pytest.approx(1.0, abs=1e-14)
    assert moment(quad8.nodes, 0, quad8) == pytest.approx(0.0, abs=1e-15)
    assert moment(one, 2, quad8) == pytest.approx(1 / 3, abs=1e-14)
    assert moment(quad8.nodes ** 2, 2, quad8) == pytest.approx(1 / 5, abs=1e-14)


def test_exact_up_to_degree_15(quad8):
    for k in range(16):
        exact = 0.0 if k % 2 else 1.0 / (k + 1)
        assert 0.5 * np.sum(quad8.weights * quad8.nodes ** k) == pytest.approx(exact, abs=1e-14)


@pytest.mark.parametrize("order", [0, 1, 3, 7, -2, 2.0])
def test_bad_orders(order):
    with pytest.raises(InvalidArgumentError):
        build_quadrature(order)


def test_moment_errors(quad8):
    with pytest.raises(InvalidArgumentError):
        moment(np.ones(7), 0, quad8)
    with pytest.raises(InvalidArgumentError):
        moment(np.ones(8), 4, quad8)


def test_nodes_are_readonly(quad8):
    with pytest.raises(ValueError):
        quad8.nodes[0] = 0.0


# decomposition ---------------------------------------------------------------

def test_decompose_examples(quad8):
    n = quad8.nodes
    c = decompose(np.full(8, 2.5), quad8)
    assert c.J == pytest.approx(2.5) and c.R == pytest.approx(0, abs=1e-15)
    assert np.max(np.abs(c.Q)) < 1e-15
    c = decompose(n, quad8)
    assert c.J == pytest.approx(0, abs=1e-15) and c.R == pytest.approx(1.0, abs=1e-14)
    c = decompose(n ** 2, quad8)
    assert c.J == pytest.approx(1 / 3, abs=1e-15)
    np.testing.assert_allclose(c.Q, n ** 2 - 1 / 3, atol=1e-15)
    assert c.K_Q == pytest.approx(4 / 45, abs=1e-15)
    assert c.Q3 == pytest.approx(0, abs=1e-15)


def test_recompose_examples(quad8):
    z = np.zeros(8)
    np.testing.assert_array_equal(recompose(CellRadiation(z, 1.0, 0.0, z, 0.0, 0.0), quad8), 1.0)
    np.testing.assert_allclose(recompose(CellRadiation(z, 0.0, 3.0, z, 0.0, 0.0), quad8),
                               3 * quad8.nodes)


def test_decompose_rejects_nonfinite(quad8):
    from rmhd_ap.core import NumericError
    I = np.ones((3, 8))
    I[1, 2] = np.nan
    with pytest.raises(NumericError) as ei:
        decompose(I, quad8)
    assert ei.value.cell == 1


def test_constraints_on_batch(quad8):
    rng = np.random.default_rng(3)
    I = rng.normal(size=(50, 8))
    c = decompose(I, quad8)
    m, f = constraint_norms(c.Q, quad8)
    assert m < 1e-14 and f < 1e-14
