"""Poissonization and symplectization on slit charts, and the equivalence
of dual-pair verdicts upstairs and downstairs.

A Jacobi pair (Π, E) on a chart M lifts to the homogeneous bivector

    P = s⁻¹ Π + ∂s ∧ E

on M × R^×, with s the extra fiber coordinate (last slot).  The closed form
is re-derived here from the defining oracle {s·f∘π, s·g∘π}_P = s·({f,g}∘π)
and that oracle test ships permanently.  A contact form θ lifts to the
exact symplectic form ω~ = d(s·π*θ), and inverting ω~ pointwise reproduces
the Poissonization of the induced Jacobi pair (two independent routes).

R^× is modeled as the punctured fiber coordinate s, sampled in
[-2, -0.5] ∪ [0.5, 2] so both components are exercised.
"""
from __future__ import annotations

import itertools

import numpy as np

from .calculus import Multivector, VectorField, schouten
from .chart import Chart, SmoothMap, tangent_map
from .errors import OracleMismatch, ZeroConformalFactor
from .fields import Field, ScalarFieldSpec, as_field, compose, constant, coordinate
from .jacobi import JacobiPair, bracket_field
from .jets import Jet
from .linalg import BilinearForm, full_space, kernel, orth_complement_wrt, subspace_equal
from .report import CheckReport, residual_report

S_SLICES = (1.0, 2.0, -1.0)


def slit_chart(chart, name=None):
    """chart × R^×, the fiber coordinate s last, 0 < 0.5 ≤ |s| ≤ 2 sampled."""
    box = list(chart.box) + [(0.5, 2.0)]
    base_excl = chart.excluded

    def excl(p):
        if abs(p[-1]) < 0.5:
            return True
        return base_excl(p[:-1]) if base_excl is not None else False

    return Chart(name or f"{chart.name}_slit", chart.dim + 1, box, excl)


def _lift_field(f, n):
    """f on the base, viewed on the slit chart (ignores s)."""
    f = as_field(n, f)
    base_slots = [coordinate(n + 1, i) for i in range(n)]
    return compose(f, base_slots, source_dim=n + 1)


class HomogeneousBivector:
    """Bivector on a slit chart, homogeneous of bidegree t^{-1}."""

    def __init__(self, chart, P):
        self.chart = chart
        self.P = P if isinstance(P, Multivector) else Multivector(chart, 2, P)

    def matrix(self, p):
        return self.P.dense(p)

    def bracket_field(self, f, g):
        J = JacobiPair(self.chart, self.P.comps,
                       [constant(self.chart.dim, 0.0)] * self.chart.dim)
        return bracket_field(J, f, g)

    def as_pair(self):
        return JacobiPair(self.chart, self.P.comps,
                          [constant(self.chart.dim, 0.0)] * self.chart.dim)


def poissonize(J, pts=None, tol=1e-9):
    """P = s⁻¹Π + ∂s∧E on the slit chart, certified against its oracle.

    Raises OracleMismatch if {s·f∘π, s·g∘π}_P deviates from s·({f,g}_J∘π)
    on coordinate test functions at the sample points.
    """
    n = J.chart.dim
    big = slit_chart(J.chart)
    comps = {}
    s_field = coordinate(n + 1, n)
    for (i, j), f in J.Pi.comps.items():
        comps[(i, j)] = _lift_field(f, n) / s_field
    for i in range(n):
        comps[(i, n)] = -_lift_field(J.E.comps[i], n)   # (∂s∧E)^{i,s} = -E^i
    P = HomogeneousBivector(big, comps)
    if pts is None:
        from .chart import sample_points
        pts = sample_points(big, 5, seed=61)
    rep = check_poissonization_oracle(P, J, pts, tol)
    if not rep.passed:
        raise OracleMismatch(
            f"poissonization closed form fails its oracle: {rep.max_residual:.2e}")
    return P


def check_poissonization_oracle(P, J, pts, tol=1e-9, test_fns=None):
    """{s·f∘π, s·g∘π}_P = s·({f,g}_J ∘ π) on test-function pairs."""
    n = J.chart.dim
    s_field = coordinate(n + 1, n)
    if test_fns is None:
        test_fns = [constant(n, 1.0)] + [coordinate(n, i) for i in range(n)]
    fields = []
    for f, g in itertools.combinations_with_replacement(test_fns, 2):
        lhs = P.bracket_field(s_field * _lift_field(f, n),
                              s_field * _lift_field(g, n))
        rhs = s_field * _lift_field(bracket_field(J, f, g), n)
        fields.append(lhs - rhs)
    residuals = []
    for p in pts:
        r = max(abs(f.value(p)) for f in fields)
        residuals.append((p, r))
    return residual_report(
        "poissonization_oracle",
        "{s f.pi, s g.pi}_P = s ({f,g}.pi)", residuals, tol)


def check_homogeneity(P, pts, ts=(2.0, 1.0 / 3.0, -1.0), tol=1e-9):
    """h_t-pullback scaling: the lifted bivector scales as t^{-1}.

    Componentwise: P^{ij}(x, ts) = t^{-1} P^{ij}(x, s) for base indices and
    P^{is}(x, ts) = P^{is}(x, s) (one ∂s leg absorbs a factor t).
    """
    n = P.chart.dim - 1
    residuals = []
    for p in pts:
        r = 0.0
        for t in ts:
            q = np.array(p, dtype=float)
            q[-1] *= t
            M = P.matrix(p)
            Mq = P.matrix(q)
            for i in range(n):
                for j in range(n):
                    r = max(r, abs(Mq[i, j] - M[i, j] / t))
                r = max(r, abs(Mq[i, n] - M[i, n]))
        residuals.append((p, r))
    return residual_report(
        "poissonization_homogeneity",
        "h_t-pullback of the lifted bivector is t^{-1} times itself",
        residuals, tol)


def dehomogenize(P, base_chart):
    """Read (Π, E) back from P at the s = 1 slice."""
    n = base_chart.dim

    def at_slice(field):
        slots = [coordinate(n, i) for i in range(n)] + [constant(n, 1.0)]
        return compose(field, slots)

    pi_comps = {}
    e_comps = [constant(n, 0.0)] * n
    for (i, j), f in P.P.comps.items():
        if j < n:
            pi_comps[(i, j)] = at_slice(f)
        else:
            e_comps[i] = at_slice(-f)   # P^{i,s} = -E^i
    return JacobiPair(base_chart, pi_comps, e_comps)


def symplectize(C):
    """ω~ = d(s·π*θ) = ds∧π*θ + s·π*dθ on the slit chart."""
    from .calculus import KForm, exterior_d_form
    n = C.chart.dim
    big = slit_chart(C.chart)
    s_field = coordinate(n + 1, n)
    d_theta = exterior_d_form(C.theta)
    comps = {}
    for (i, j), f in d_theta.comps.items():
        comps[(i, j)] = s_field * _lift_field(f, n)
    for i in range(n):
        th = C.theta_fields()[i]
        comps[(i, n)] = -_lift_field(th, n)   # ds∧θ has ω~(e_i, e_s) = -θ_i
    return KForm(big, 2, comps), big


def symplectic_matrix(omega, p):
    n = omega.chart.dim
    M = np.zeros((n, n))
    for (i, j), f in omega.comps.items():
        v = f.value(p)
        M[i, j] = v
        M[j, i] = -v
    return M


def check_symplectization(C, pts, tol=1e-9):
    """dω~ = 0, nondegeneracy, and h_t-homogeneity of ω~ (degree +1)."""
    from .calculus import exterior_d
    omega, big = symplectize(C)
    residuals = []
    for p in pts:
        r = 0.0
        d = exterior_d(omega, p)
        r = max(r, max((abs(v) for v in d.values()), default=0.0))
        M = symplectic_matrix(omega, p)
        if abs(np.linalg.det(M)) < tol:
            r = max(r, 1.0)
        for t in (2.0, -1.0):
            q = np.array(p, dtype=float)
            q[-1] *= t
            Mq = symplectic_matrix(omega, q)
            n = C.chart.dim
            for i in range(n):
                for j in range(n):
                    r = max(r, abs(Mq[i, j] - t * M[i, j]))
                # mixed entries ω~(e_i, e_s) pick up no factor
                r = max(r, abs(Mq[i, n] - M[i, n]))
        residuals.append((p, r))
    return residual_report(
        "symplectization",
        "d omega~ = 0; omega~ nondegenerate; h_t* omega~ = t omega~",
        residuals, tol)


def check_symplectization_consistency(C, pts, tol=1e-8, source_pair=None):
    """Invert ω~ pointwise and compare with the Poissonization of the
    induced Jacobi pair: the two routes must agree componentwise."""
    omega, big = symplectize(C)
    J = source_pair if source_pair is not None else \
        __import__("jdl.contact", fromlist=["contact_to_jacobi"]).contact_to_jacobi(C)
    P = poissonize(J)
    residuals = []
    for p in pts:
        W = symplectic_matrix(omega, p)
        P_from_omega = -np.linalg.inv(W)
        r = float(np.abs(P_from_omega - P.matrix(p)).max())
        residuals.append((p, r))
    return residual_report(
        "symplectization_consistency",
        "-(omega~)^{-1} equals the lifted bivector of the induced pair",
        residuals, tol)


def homogenize_map(Phi, source_slit=None, target_slit=None):
    """Lift (φ, a) to the slit charts: (x, s) ↦ (φ(x), a(x)·s)."""
    n = Phi.map.source.dim
    m = Phi.map.target.dim
    if source_slit is None:
        source_slit = slit_chart(Phi.map.source)
    if target_slit is None:
        target_slit = slit_chart(Phi.map.target)
    comps = [_lift_field(c, n) for c in Phi.map.components]
    comps.append(_lift_field(Phi.factor, n) * coordinate(n + 1, n))
    return SmoothMap(source_slit, target_slit, comps)


def check_equivariance(Phi, pts, ts=(2.0, -1.0, 0.5), tol=1e-10):
    """Φ~ ∘ h_t = h_t ∘ Φ~ at sample points."""
    lifted = homogenize_map(Phi)
    residuals = []
    for p in pts:
        r = 0.0
        out = lifted(p)
        for t in ts:
            q = np.array(p, dtype=float)
            q[-1] *= t
            scaled = lifted(q)
            expect = np.array(out, dtype=float)
            expect[-1] *= t
            r = max(r, float(np.abs(scaled - expect).max()))
        residuals.append((p, r))
    return residual_report("lift_equivariance",
                           "lifted map commutes with the fiber scaling",
                           residuals, tol)


def check_lifted_poisson_map(Phi, J_source, J_target, pts, tol=1e-8):
    """A Jacobi morphism lifts to a Poisson map of the Poissonizations."""
    P1 = poissonize(J_source)
    P2 = poissonize(J_target)
    lifted = homogenize_map(Phi)
    m = J_target.chart.dim
    tests = [coordinate(m + 1, i) for i in range(m + 1)]
    tests.append(coordinate(m + 1, m) * coordinate(m + 1, 0) if m else
                 coordinate(m + 1, m))
    fields = []
    for F, G in itertools.combinations(tests, 2):
        pullF = compose(F, lifted.components)
        pullG = compose(G, lifted.components)
        lhs = P1.bracket_field(pullF, pullG)
        rhs = compose(P2.bracket_field(F, G), lifted.components)
        fields.append(lhs - rhs)
    residuals = [(p, max(abs(f.value(p)) for f in fields)) for p in pts]
    return residual_report(
        "lifted_poisson_map",
        "pullback along the lifted map intertwines the lifted brackets",
        residuals, tol)


def check_homogeneous_sdp_equivalence(dp, pts, s_slices=S_SLICES,
                                      angle_tol=1e-7):
    """Lifted symplectic orthogonality agrees with the base verdict.

    At each lifted point (x, s): ker TΦ~1 = (ker TΦ~2)^⊥ω~, compared with
    the base dual-pair verdict of verify_dual_pair at x.
    """
    from .dualpair import (commutation_residual, _commutation_fields,
                           curvature_orthogonality_at, transversality_ok)
    omega, big = symplectize(dp.source)
    lift1 = homogenize_map(dp.Phi1, source_slit=big)
    lift2 = homogenize_map(dp.Phi2, source_slit=big)
    fields = _commutation_fields(dp)
    residuals = []
    mismatches = 0
    for p in pts:
        base_ok = (transversality_ok(dp, p)
                   and commutation_residual(dp, p, fields) < 1e-8
                   and curvature_orthogonality_at(dp, p, angle_tol)[0])
        worst = 0.0
        lifted_ok = True
        for s in s_slices:
            q = np.append(p, s)
            W = BilinearForm(symplectic_matrix(omega, q))
            K1 = kernel(tangent_map(lift1, q))
            K2 = kernel(tangent_map(lift2, q))
            comp = orth_complement_wrt(W, K2, full_space(big.dim))
            same, ang = subspace_equal(K1, comp, angle_tol)
            lifted_ok = lifted_ok and same
            worst = max(worst, ang if same else np.pi / 2)
        if lifted_ok != base_ok:
            mismatches += 1
        residuals.append((p, worst if base_ok else 0.0))
    rep = residual_report(
        "homogeneous_sdp_equivalence",
        "ker T Phi~1 = (ker T Phi~2)^perp-omega~ at lifted points iff the "
        "base spec is a dual pair", residuals, angle_tol)
    if mismatches:
        rep.status = "fail"
        rep.notes = f"{mismatches} points with upstairs/downstairs mismatch"
    return rep


def check_schouten_square(P, pts, tol=1e-9):
    """[[P,P]] = 0 for the lifted bivector (it is Poisson)."""
    residuals = []
    for p in pts:
        out = schouten(P.P, P.P, p)
        r = max((abs(v) for v in out.values()), default=0.0)
        residuals.append((p, r))
    return residual_report("lifted_poisson", "[[P,P]] = 0 on the slit chart",
                           residuals, tol)
