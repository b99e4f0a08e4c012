import numpy as np
import pytest

from jdl.chart import Chart, sample_points
from jdl.contact import (ContactStructure, LcsStructure, check_contact,
                         check_lcs, contact_field_property,
                         contact_hamiltonian_vf, contact_to_jacobi,
                         curvature_form, lcs_bracket, lcs_from_even_pair,
                         lcs_hamiltonian_vf, reeb, reeb_field,
                         volume_coefficient)
from jdl.errors import EvenDimension, SingularSystem
from jdl.fields import ScalarFieldSpec, constant, coordinate
from jdl.jacobi import (JacobiPair, check_jacobi_pair, hamiltonian_vf,
                        jacobi_bracket)


@pytest.fixture
def darboux3():
    chart = Chart("darboux3", 3, [(-2, 2)] * 3)
    return ContactStructure(chart, {(0,): lambda x, y, z: -y, (2,): 1.0})


@pytest.fixture
def trivgpd():
    chart = Chart("trivgpd", 3, [(-2, 2)] * 3)
    return ContactStructure(chart, {(0,): lambda q, p, u: p, (2,): 1.0})


@pytest.fixture
def pts(darboux3):
    return sample_points(darboux3.chart, 20, seed=21)


def test_check_contact_darboux(darboux3, pts):
    rep = check_contact(darboux3, pts)
    assert rep.passed
    assert abs(abs(volume_coefficient(darboux3, pts[0])) - 1.0) < 1e-12


def test_check_contact_fails_for_closed_form(pts):
    chart = Chart("flat", 3, [(-2, 2)] * 3)
    C = ContactStructure(chart, {(2,): 1.0})   # θ = dz, dθ = 0
    assert not check_contact(C, pts).passed


def test_check_contact_trivgpd(trivgpd):
    pts = sample_points(trivgpd.chart, 20, seed=22)
    assert check_contact(trivgpd, pts).passed


def test_even_dim_guard():
    with pytest.raises(EvenDimension):
        ContactStructure(Chart("r2", 2), {(0,): 1.0})


def test_reeb_darboux(darboux3, pts):
    for p in pts[:5]:
        assert np.allclose(reeb(darboux3, p), [0, 0, 1], atol=1e-12)
    E = reeb_field(darboux3)
    assert np.allclose(E.at(pts[0]), [0, 0, 1], atol=1e-12)


def test_reeb_trivgpd(trivgpd):
    pts = sample_points(trivgpd.chart, 5, seed=23)
    for p in pts:
        assert np.allclose(reeb(trivgpd, p), [0, 0, 1], atol=1e-12)


def test_reeb_scaling(darboux3):
    # θ' = 2θ has Reeb E' = E/2
    chart = darboux3.chart
    C2 = ContactStructure(chart, {(0,): lambda x, y, z: -2.0 * y, (2,): 2.0})
    p = [0.3, 0.4, 0.5]
    assert np.allclose(reeb(C2, p), [0, 0, 0.5], atol=1e-12)


def test_reeb_rejects_noncontact():
    chart = Chart("flat", 3, [(-2, 2)] * 3)
    C = ContactStructure(chart, {(2,): 1.0})
    with pytest.raises(SingularSystem):
        reeb(C, [0.1, 0.2, 0.3])


def test_curvature_darboux_origin(darboux3):
    H, c = curvature_form(darboux3, [0.0, 0.0, 0.0])
    assert H.dim == 2
    # c = -(dθ)|_H is nondegenerate with |det| = 1 at the origin
    assert abs(abs(np.linalg.det(c.matrix)) - 1.0) < 1e-12
    # the value c(∂x, ∂y) = -1 read in the (∂x, ∂y)-aligned H-basis
    ex = H.basis.T @ np.array([1.0, 0.0, 0.0])
    ey = H.basis.T @ np.array([0.0, 1.0, 0.0])
    assert abs(float(ex @ c.matrix @ ey) + 1.0) < 1e-12


def test_curvature_nondegenerate_everywhere(darboux3):
    pts = sample_points(darboux3.chart, 100, seed=24)
    for p in pts:
        _, c = curvature_form(darboux3, p)
        assert abs(np.linalg.det(c.matrix)) > 1e-8


def test_curvature_trivgpd_value(trivgpd):
    # c(∂p, ∂q - p∂u) = -1
    p = np.array([0.4, 0.7, -0.2])
    H, c = curvature_form(trivgpd, p)
    v1 = H.basis.T @ np.array([0.0, 1.0, 0.0])
    v2 = H.basis.T @ np.array([1.0, 0.0, -p[1]])
    assert abs(float(v1 @ c.matrix @ v2) + 1.0) < 1e-12


def test_hamiltonian_fields_darboux(darboux3, pts):
    x = coordinate(3, 0)
    y = coordinate(3, 1)
    one = constant(3, 1.0)
    for p in pts[:5]:
        assert np.allclose(contact_hamiltonian_vf(darboux3, x, p),
                           [0.0, 1.0, p[0]], atol=1e-10)
        assert np.allclose(contact_hamiltonian_vf(darboux3, one, p),
                           [0, 0, 1], atol=1e-10)
        assert np.allclose(contact_hamiltonian_vf(darboux3, y, p),
                           [-1.0, 0.0, 0.0], atol=1e-10)


def test_theta_of_hamiltonian_is_f(darboux3, pts):
    f = ScalarFieldSpec(3, lambda x, y, z: x * y + z * z - 0.5)
    for p in pts:
        X = contact_hamiltonian_vf(darboux3, f, p)
        assert abs(darboux3.theta_covector(p) @ X - f.value(p)) < 1e-10


def test_contact_field_property(darboux3, pts):
    f = ScalarFieldSpec(3, lambda x, y, z: x + y * z)
    for p in pts[:10]:
        assert contact_field_property(darboux3, f, p) < 1e-10


def test_contact_to_jacobi_darboux(darboux3, pts):
    J = contact_to_jacobi(darboux3)
    p = pts[0]
    expected = np.zeros((3, 3))
    expected[0, 1] = 1.0
    expected[1, 0] = -1.0
    expected[1, 2] = -p[1]
    expected[2, 1] = p[1]
    assert np.abs(J.pi_matrix(p) - expected).max() < 1e-10
    assert np.allclose(J.E.at(p), [0, 0, 1], atol=1e-10)
    assert check_jacobi_pair(J, pts, tol=1e-10).passed


def test_contact_to_jacobi_trivgpd(trivgpd):
    # θ = du + p dq gives Π = ∂p∧(∂q - p∂u), E = ∂u (so {p,q} = +1)
    J = contact_to_jacobi(trivgpd)
    p = np.array([0.5, -0.8, 0.1])
    M = J.pi_matrix(p)
    assert abs(M[1, 0] - 1.0) < 1e-10       # Π^{pq} = +1
    assert abs(M[1, 2] + p[1]) < 1e-10      # Π^{pu} = -p
    assert np.allclose(J.E.at(p), [0, 0, 1], atol=1e-10)


def test_route_agreement(darboux3):
    # contact_hamiltonian_vf == hamiltonian_vf(contact_to_jacobi(C), ·)
    J = contact_to_jacobi(darboux3)
    pts = sample_points(darboux3.chart, 100, seed=25)
    f = ScalarFieldSpec(3, lambda x, y, z: x * z + y)
    for p in pts:
        a = contact_hamiltonian_vf(darboux3, f, p)
        b = hamiltonian_vf(J, f, p)
        assert np.abs(a - b).max() < 1e-9


def test_transitive(darboux3, pts):
    # characteristic distribution of the induced pair is everything
    J = contact_to_jacobi(darboux3)
    from jdl.leaves import characteristic_subspace
    for p in pts[:5]:
        assert characteristic_subspace(J, p).dim == 3


def test_lcs_symplectic_plane():
    chart = Chart("r2", 2, [(-2, 2)] * 2)
    L = LcsStructure(chart, {}, {(0, 1): 1.0})
    pts = sample_points(chart, 10, seed=26)
    assert check_lcs(L, pts).passed
    x = coordinate(2, 0)
    y = coordinate(2, 1)
    for p in pts[:5]:
        assert abs(lcs_bracket(L, x, y, p) - 1.0) < 1e-12


def test_lcs_bracket_matches_pair_bracket():
    # η = 0 reduces to the Poisson bracket of the inverse pair
    chart = Chart("r2", 2, [(-2, 2)] * 2)
    L = LcsStructure(chart, {}, {(0, 1): 1.0})
    J = JacobiPair(chart, {(0, 1): 1.0}, [0.0, 0.0])
    rng = np.random.default_rng(27)
    f = ScalarFieldSpec(2, lambda x, y: x * x + y)
    g = ScalarFieldSpec(2, lambda x, y: x * y - 1.0)
    for _ in range(5):
        p = rng.uniform(-1, 1, 2)
        assert abs(lcs_bracket(L, f, g, p)
                   - jacobi_bracket(J, f, g, p)) < 1e-10


def test_lcs_exponential_example():
    # (η, ω) = (dx, e^x dx∧dy) on R^2: a genuine l.c.s. structure
    from jdl.jets import exp
    chart = Chart("r2", 2, [(-1, 1)] * 2)
    L = LcsStructure(chart, {(0,): 1.0},
                     {(0, 1): lambda x, y: exp(x)})
    rep = check_lcs(L, sample_points(chart, 10, seed=28))
    assert rep.passed
    assert "degenerate-dimension" in rep.notes


def test_lcs_from_even_pair_round_trip():
    chart = Chart("r2", 2, [(-2, 2)] * 2)
    J = JacobiPair(chart, {(0, 1): lambda x, y: 1.0 + 0.3 * x * x},
                   [0.0, 0.0])
    L = lcs_from_even_pair(J)
    pts = sample_points(chart, 10, seed=29)
    assert check_lcs(L, pts).passed
    f = ScalarFieldSpec(2, lambda x, y: x + y * y)
    g = ScalarFieldSpec(2, lambda x, y: x * y)
    for p in pts[:5]:
        assert np.abs(lcs_hamiltonian_vf(L, f, p)
                      - hamiltonian_vf(J, f, p)).max() < 1e-9
        assert abs(lcs_bracket(L, f, g, p)
                   - jacobi_bracket(J, f, g, p)) < 1e-9


def test_lcs_from_even_pair_with_nonzero_e():
    # transitive even pair with E ≠ 0: E must lie in the image of Π♯;
    # take Π = ∂x∧∂y, E = x∂x brackets... need a certified pair: use the
    # conformal change of the symplectic plane by c = e^x, which twists E
    from jdl.jacobi import conformal_change
    from jdl.jets import exp
    chart = Chart("r2", 2, [(-2, 2)] * 2)
    J0 = JacobiPair(chart, {(0, 1): 1.0}, [0.0, 0.0])
    c = ScalarFieldSpec(2, lambda x, y: exp(0.5 * x))
    J = conformal_change(J0, c)
    pts = sample_points(chart, 10, seed=30)
    assert check_jacobi_pair(J, pts, tol=1e-9).passed
    L = lcs_from_even_pair(J)
    assert check_lcs(L, pts, tol=1e-8).passed
    # η is nonzero here
    assert np.abs(L.eta_covector(pts[0])).max() > 1e-3
    f = ScalarFieldSpec(2, lambda x, y: x * y + 1.0)
    for p in pts[:5]:
        assert np.abs(lcs_hamiltonian_vf(L, f, p)
                      - hamiltonian_vf(J, f, p)).max() < 1e-8
