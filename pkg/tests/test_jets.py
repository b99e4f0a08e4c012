import math

import numpy as np
import pytest

from jdl import jets
from jdl.errors import DimensionMismatch, DomainViolation, OrderUnsupported
from jdl.jets import (Jet, coordinate_jets, jet_compose, jet_lift,
                      partial_jet, taylor_compose)

from conftest import fd_gradient, fd_hessian


def test_polynomial_by_hand():
    # f(x,y) = x^2 y at (2,3): value 12, grad (12,4), hess [[6,4],[4,0]]
    j = jet_lift(lambda x, y: x * x * y, [2.0, 3.0], 2)
    assert j.value == 12.0
    assert np.allclose(j.grad, [12.0, 4.0])
    assert np.allclose(j.hess, [[6.0, 4.0], [4.0, 0.0]])


def test_constant_and_identity():
    j = jet_lift(lambda x, y: 1.0, [0.3, -0.2], 2)
    assert j.value == 1.0
    assert np.all(j.grad == 0) and np.all(j.hess == 0)
    j = jet_lift(lambda x: x, [5.0], 2)
    assert j.value == 5.0 and j.grad[0] == 1.0 and j.hess[0, 0] == 0.0


def test_compose_square_of_sum():
    F = jet_lift(lambda x, y: x + y, [1.0, 2.0], 2)
    g = jet_compose(lambda u: u * u, [F])
    assert g.value == 9.0
    assert np.allclose(g.grad, [6.0, 6.0])
    assert np.allclose(g.hess, [[2.0, 2.0], [2.0, 2.0]])


def test_compose_identity_and_constant():
    F = jet_lift(lambda x, y: x * y + y, [1.5, -0.5], 2)
    same = jet_compose(lambda u: u, [F])
    assert same.value == F.value and np.allclose(same.grad, F.grad)
    const = jet_compose(lambda u: 7.0, [F])
    assert const.value == 7.0 and np.all(const.grad == 0)


def _random_field(rng):
    """A random polynomial/trig scalar field in 2-4 variables."""
    n = int(rng.integers(2, 5))
    c = rng.normal(size=6)

    def f(*xs):
        a, b = xs[0], xs[1 % n]
        expr = c[0] * a + c[1] * b + c[2] * a * b + c[3] * a * a * b
        expr = expr + c[4] * jets.sin(a) + c[5] * jets.cos(a * b)
        return expr

    return n, f


def test_jets_match_finite_differences():
    # 200 random fields/points: grads and hessians agree with central FD
    rng = np.random.default_rng(7)
    for _ in range(200):
        n, f = _random_field(rng)
        p = rng.uniform(-1.0, 1.0, size=n)
        j = jet_lift(f, p, 2)

        def fval(q):
            return jet_lift(f, q, 1).value

        g_fd = fd_gradient(fval, p)
        h_fd = fd_hessian(fval, p)
        scale = 1.0 + np.abs(g_fd).max()
        assert np.abs(j.grad - g_fd).max() < 1e-5 * scale
        assert np.abs(j.hess - h_fd).max() < 1e-4 * (1.0 + np.abs(h_fd).max())


def test_product_rule_exact():
    rng = np.random.default_rng(11)
    for _ in range(20):
        c = rng.normal(size=4)

        def f(x, y):
            return c[0] * x * x + c[1] * y

        def g(x, y):
            return c[2] * x * y + c[3]

        p = rng.uniform(-2, 2, size=2)
        jf, jg = jet_lift(f, p, 2), jet_lift(g, p, 2)
        prod = jf * jg
        direct = jet_lift(lambda x, y: f(x, y) * g(x, y), p, 2)
        assert abs(prod.value - direct.value) < 1e-12
        assert np.abs(prod.grad - direct.grad).max() < 1e-12
        assert np.abs(prod.hess - direct.hess).max() < 1e-12


def test_composition_associativity():
    rng = np.random.default_rng(13)
    for _ in range(20):
        p = rng.uniform(0.2, 1.0, size=2)
        F = jet_lift(lambda x, y: x * y + 0.5, p, 2)

        def h(u):
            return u * u + 1.0

        def g(v):
            return jets.log(v)

        via_two = jet_compose(g, [jet_compose(h, [F])])
        direct = jet_compose(lambda u: g(h(u)), [F])
        assert abs(via_two.value - direct.value) < 1e-12
        assert np.abs(via_two.grad - direct.grad).max() < 1e-12
        assert np.abs(via_two.hess - direct.hess).max() < 1e-12


def test_division_and_sqrt_against_fd():
    rng = np.random.default_rng(17)
    for _ in range(30):
        p = rng.uniform(0.3, 1.5, size=2)

        def f(x, y):
            return jets.sqrt(x * y + 1.0) / (x + 2.0 * y)

        j = jet_lift(f, p, 2)
        g_fd = fd_gradient(lambda q: jet_lift(f, q, 1).value, p)
        assert np.abs(j.grad - g_fd).max() < 1e-6


def test_atan2_quadrants():
    for (y, x) in [(1.0, 2.0), (1.0, -2.0), (-1.0, -2.0), (-1.0, 2.0),
                   (2.0, 0.5), (2.0, -0.5), (-2.0, 0.5), (-2.0, -0.5)]:
        j = jet_lift(lambda a, b: jets.atan2(a, b), [y, x], 2)
        assert abs(j.value - math.atan2(y, x)) < 1e-14
        r2 = x * x + y * y
        assert np.allclose(j.grad, [x / r2, -y / r2], atol=1e-12)


def test_atan2_rejects_origin():
    with pytest.raises(DomainViolation):
        jet_lift(lambda a, b: jets.atan2(a, b), [0.0, 0.0], 2)


def test_domain_errors_not_nan():
    with pytest.raises(DomainViolation):
        jet_lift(lambda x: jets.log(x), [-1.0], 2)
    with pytest.raises(DomainViolation):
        jet_lift(lambda x: jets.sqrt(x), [-1.0], 2)
    with pytest.raises(DomainViolation):
        jet_lift(lambda x: 1.0 / x, [0.0], 2)


def test_order_guard():
    with pytest.raises(OrderUnsupported):
        jet_lift(lambda x: x, [1.0], 4)


def test_order1_order2_agree():
    p = [0.4, -1.2]

    def f(x, y):
        return jets.exp(x) * jets.sin(y) + x * y

    j1 = jet_lift(f, p, 1)
    j2 = jet_lift(f, p, 2)
    assert j1.value == j2.value
    assert np.allclose(j1.grad, j2.grad)


def test_third_order_symbolic():
    # f = sin(x y): f_xxy = -2y sin(xy) - x y^2 cos(xy)
    x, y = 0.3, -0.7
    j = jet_lift(lambda a, b: jets.sin(a * b), [x, y], 3)
    expected = -2 * y * math.sin(x * y) - x * y * y * math.cos(x * y)
    assert abs(j.third[0, 0, 1] - expected) < 1e-12
    # full symmetry of the third-order tensor
    t = j.third
    assert np.allclose(t, t.transpose(1, 0, 2))
    assert np.allclose(t, t.transpose(2, 1, 0))


def test_partial_jet_shift():
    # ∂_x (x^2 y) = 2xy with grad (2y, 2x)
    j = partial_jet(lambda x, y: x * x * y, 0, [2.0, 3.0], 1)
    assert j.value == 12.0
    assert np.allclose(j.grad, [6.0, 4.0])


def test_taylor_compose_matches_direct():
    rng = np.random.default_rng(23)
    for order in (1, 2, 3):
        p = rng.uniform(-1, 1, size=2)
        comp = [jet_lift(lambda x, y: x * y + y, p, order),
                jet_lift(lambda x, y: x + 2.0, p, order)]

        def g(u, v):
            return u * u * v + jets.sin(u)

        q = np.array([comp[0].value, comp[1].value])
        gj = jet_lift(g, q, order)
        via_taylor = taylor_compose(gj, comp)
        direct = jet_compose(g, comp)
        assert abs(via_taylor.value - direct.value) < 1e-12
        assert np.abs(via_taylor.grad - direct.grad).max() < 1e-11
        if order >= 2:
            assert np.abs(via_taylor.hess - direct.hess).max() < 1e-11
        if order == 3:
            assert np.abs(via_taylor.third - direct.third).max() < 1e-10


def test_dim_mismatch_raises():
    a = jet_lift(lambda x, y: x + y, [1.0, 2.0], 2)
    b = jet_lift(lambda x: x, [1.0], 2)
    with pytest.raises(DimensionMismatch):
        _ = a + b
