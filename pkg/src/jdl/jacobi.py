"""Jacobi pairs on charts: integrability, brackets, Hamiltonian fields,
morphisms, Lie-Poisson structures and the projectivized-coalgebra oracle.

A Jacobi pair is a bivector field Π and a vector field E on a chart subject
to [[Π,Π]] = 2E∧Π and [[E,Π]] = 0.  The associated bracket on functions is

    {f, g} = Π(df, dg) + f E(g) - g E(f),

with Hamiltonian vector field X_f = Π♯(df) + f E and distinguished field
E = X_1.  All derived objects stay jet-evaluable, so nested brackets are
exact (no finite-difference layer is needed for Jacobi-identity checks).
"""
from __future__ import annotations

import itertools

import numpy as np

from .calculus import (Multivector, VectorField, schouten, wedge_vec_biv)
from .chart import Chart, tangent_map
from .errors import (ChartIndexInvalid, DimensionMismatch, InconsistentOracle,
                     ZeroConformalFactor)
from .fields import Field, ScalarFieldSpec, as_field, compose, constant, coordinate
from .jets import Jet
from .report import CheckReport, residual_report

JACOBI_IDENTITY = "[[Pi,Pi]] = 2 E^Pi and [[E,Pi]] = 0"
MORPHISM_IDENTITY = "{a phi*f, a phi*g}_1 = a phi*{f,g}_2"


class JacobiPair:
    """Bivector Π and vector field E on a chart."""

    def __init__(self, chart, Pi, E):
        self.chart = chart
        if isinstance(Pi, dict):
            Pi = Multivector(chart, 2, Pi)
        if isinstance(E, (list, tuple)):
            E = VectorField(chart, list(E))
        self.Pi = Pi
        self.E = E
        self.certified = False

    def pi_matrix(self, p):
        return self.Pi.dense(p)

    def negated(self):
        """The opposite structure (-Π, -E)."""
        neg_pi = {k: -f for k, f in self.Pi.comps.items()}
        neg_e = [-c for c in self.E.comps]
        return JacobiPair(self.chart, neg_pi, neg_e)

    def __repr__(self):
        return f"JacobiPair(chart={self.chart.name!r})"


def zero_pair(chart):
    return JacobiPair(chart, {}, [constant(chart.dim, 0.0)] * chart.dim)


class ConformalMap:
    """A smooth map together with a nowhere-zero conformal factor.

    Pulls back functions on the target to sections upstairs by
    (Φ*g)(x) = a(x) g(φ(x)).
    """

    def __init__(self, map, factor=1.0):
        self.map = map
        self.factor = as_field(map.source.dim, factor)

    def pullback(self, g):
        """Φ*g as a field on the source chart."""
        g = as_field(self.map.target.dim, g)
        return self.factor * compose(g, self.map.components,
                                     source_dim=self.map.source.dim)

    def factor_value(self, p):
        a = self.factor.value(p)
        if abs(a) <= 1e-9:
            raise ZeroConformalFactor(f"conformal factor {a} at {p}")
        return a

    def __repr__(self):
        return f"ConformalMap({self.map!r})"


def check_jacobi_pair(J, pts, tol=1e-10):
    """Max residual of [[Π,Π]] - 2E∧Π and [[E,Π]] over the points."""
    residuals = []
    for p in pts:
        pp = schouten(J.Pi, J.Pi, p)
        ep = wedge_vec_biv(J.E, J.Pi, p)
        r = max((abs(pp[k] - 2.0 * ep[k]) for k in pp), default=0.0)
        le = schouten(J.E, J.Pi, p)
        r = max(r, max((abs(v) for v in le.values()), default=0.0))
        residuals.append((p, r))
    rep = residual_report("jacobi_pair", JACOBI_IDENTITY, residuals, tol)
    J.certified = J.certified or rep.passed
    return rep


def jacobi_bracket(J, f, g, p):
    """{f,g} at p."""
    return bracket_field(J, f, g).value(p)


def bracket_field(J, f, g):
    """{f,g} as a derived field (exact jets; supports nesting)."""
    f = as_field(J.chart.dim, f)
    g = as_field(J.chart.dim, g)
    n = J.chart.dim
    acc = f * J.E.apply_field(g) - g * J.E.apply_field(f)
    for (i, j), comp in J.Pi.comps.items():
        acc = acc + comp * (f.partial(i) * g.partial(j)
                            - f.partial(j) * g.partial(i))
    return acc


def hamiltonian_vf(J, f, p):
    """X_f(p) = Π♯(df)(p) + f(p) E(p)."""
    return hamiltonian_field(J, f).at(p)


def hamiltonian_field(J, f):
    """X_f as a derived VectorField."""
    f = as_field(J.chart.dim, f)
    n = J.chart.dim
    comps = [f * J.E.comps[j] for j in range(n)]
    for (i, j), pij in J.Pi.comps.items():
        # Π♯(α)^j = Σ_i α_i Π^{ij}
        comps[j] = comps[j] + pij * f.partial(i)
        comps[i] = comps[i] - pij * f.partial(j)
    return VectorField(J.chart, comps)


def default_test_functions(chart):
    """The constant 1 and the coordinates: enough first-order variation."""
    fns = [constant(chart.dim, 1.0)]
    fns += [coordinate(chart.dim, i) for i in range(chart.dim)]
    return fns


def check_jacobi_morphism(J1, J2, Phi, pts, test_fns=None, tol=1e-9):
    """Bracket compatibility and Hamiltonian pushforward along (φ, a).

    Residuals of {aφ*f, aφ*g}_1 - aφ*({f,g}_2) for all test-function pairs,
    plus Tφ·X_{aφ*g}(p) - X_g(φ(p)).
    """
    if test_fns is None:
        test_fns = default_test_functions(J2.chart)
    residuals = []
    push_fields = [(g, hamiltonian_field(J1, Phi.pullback(g)),
                    hamiltonian_field(J2, g)) for g in test_fns]
    pair_fields = []
    for f, g in itertools.combinations_with_replacement(test_fns, 2):
        lhs = bracket_field(J1, Phi.pullback(f), Phi.pullback(g))
        rhs = Phi.pullback(bracket_field(J2, f, g))
        pair_fields.append((lhs, rhs))
    for p in pts:
        Phi.factor_value(p)
        r = 0.0
        for lhs, rhs in pair_fields:
            r = max(r, abs(lhs.value(p) - rhs.value(p)))
        q = Phi.map(p)
        T = tangent_map(Phi.map, p)
        for g, up, down in push_fields:
            r = max(r, np.abs(T @ up.at(p) - down.at(q)).max())
        residuals.append((p, r))
    return residual_report("jacobi_morphism", MORPHISM_IDENTITY, residuals, tol)


class LieAlgebraData:
    """Structure constants c^k_ij with [e_i, e_j] = Σ_k c[i,j,k] e_k."""

    def __init__(self, dim, structure_constants):
        c = np.asarray(structure_constants, dtype=float)
        if c.shape != (dim, dim, dim):
            raise DimensionMismatch(
                f"structure constants must be ({dim},{dim},{dim})")
        if np.abs(c + c.transpose(1, 0, 2)).max() > 1e-12:
            raise DimensionMismatch("structure constants not antisymmetric")
        # Jacobi identity of the bracket, exact for integer/rational input
        jac = (np.einsum("ijm,mkl->ijkl", c, c)
               + np.einsum("jkm,mil->ijkl", c, c)
               + np.einsum("kim,mjl->ijkl", c, c))
        if np.abs(jac).max() > 1e-12:
            raise DimensionMismatch("structure constants violate the Jacobi identity")
        self.dim = dim
        self.c = c


def so3():
    c = np.zeros((3, 3, 3))
    for i, j, k in itertools.permutations(range(3)):
        sign = 1.0
        perm = (i, j, k)
        # Levi-Civita sign
        sign = {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1,
                (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1}[perm]
        c[i, j, k] = sign
    return LieAlgebraData(3, c)


def aff1():
    c = np.zeros((2, 2, 2))
    c[0, 1, 1] = 1.0   # [e1, e2] = e2
    c[1, 0, 1] = -1.0
    return LieAlgebraData(2, c)


def abelian(dim):
    return LieAlgebraData(dim, np.zeros((dim, dim, dim)))


def lie_poisson(g, chart=None):
    """Linear Poisson pair on the coalgebra chart: Π_ij(μ) = Σ_k c^k_ij μ_k."""
    if chart is None:
        chart = Chart(f"coalg{g.dim}", g.dim, [(-2.0, 2.0)] * g.dim)
    comps = {}
    for i, j in itertools.combinations(range(g.dim), 2):
        ck = g.c[i, j]
        if np.any(ck != 0):

            def fld(*mu, ck=ck):
                acc = 0.0
                for k, coeff in enumerate(ck):
                    if coeff != 0:
                        acc = acc + coeff * mu[k]
                return acc

            comps[(i, j)] = ScalarFieldSpec(g.dim, fld)
    return JacobiPair(chart, comps, [constant(g.dim, 0.0)] * g.dim)


def projective_chart(g, k, box=None):
    """Affine chart {μ_k ≠ 0} of the projectivized coalgebra: w_i = μ_i/μ_k."""
    if not 0 <= k < g.dim:
        raise ChartIndexInvalid(f"chart index {k} not in [0, {g.dim})")
    n = g.dim - 1
    if box is None:
        box = [(-2.0, 2.0)] * n
    return Chart(f"proj{g.dim - 1}_chart{k}", n, box)


def _homogeneous_extension(g, k, b):
    """Degree-1 homogeneous B(μ) = μ_k · b(μ/μ_k) as a field on the coalgebra."""
    n = g.dim
    others = [i for i in range(n) if i != k]
    ratios = [Field(n, lambda p, o, i=i, k=k:
                    Jet.variable(i, p, o) / Jet.variable(k, p, o))
              for i in others]
    return coordinate(n, k) * compose(as_field(n - 1, b), ratios)


def projectivized_bracket_field(g, k, b1, b2):
    """The induced bracket of two affine-chart functions, as a chart field.

    Extends b_i to degree-1 homogeneous functions, takes the linear Poisson
    bracket on the coalgebra, and reads the (again degree-1 homogeneous)
    result back on the slice μ_k = 1.
    """
    if not 0 <= k < g.dim:
        raise ChartIndexInvalid(f"chart index {k} not in [0, {g.dim})")
    lp = lie_poisson(g)
    B1 = _homogeneous_extension(g, k, b1)
    B2 = _homogeneous_extension(g, k, b2)
    big = bracket_field(lp, B1, B2)
    # embed chart point w into the slice μ_k = 1
    n = g.dim
    others = [i for i in range(n) if i != k]

    slot_fields = []
    for i in range(n):
        if i == k:
            slot_fields.append(constant(n - 1, 1.0))
        else:
            slot_fields.append(coordinate(n - 1, others.index(i)))
    return compose(big, slot_fields)


def projectivized_bracket(g, k, b1, b2, p):
    return projectivized_bracket_field(g, k, b1, b2).value(p)


def extract_pair_from_bracket(oracle, chart, pts, tol=1e-8):
    """Tabulate (Π, E) from a bracket oracle on fields.

    ``oracle(f, g)`` must return the bracket {f,g} as a field on the chart.
    Components come from E(g) = {1,g} and Π(df,dg) = {f,g} - fE(g) + gE(f)
    on coordinate functions; the reconstruction is validated against the
    oracle on quadratic test functions at the given points.
    """
    n = chart.dim
    one = constant(n, 1.0)
    xs = [coordinate(n, i) for i in range(n)]
    E_fields = [oracle(one, xs[i]) for i in range(n)]
    E = VectorField(chart, E_fields)
    pi_comps = {}
    for i, j in itertools.combinations(range(n), 2):
        pi_comps[(i, j)] = (oracle(xs[i], xs[j])
                            - xs[i] * E_fields[j] + xs[j] * E_fields[i])
    J = JacobiPair(chart, pi_comps, E_fields)

    # polarization / first-order validation on quadratic functions
    tests = [one] + xs + [xs[i] * xs[j] for i, j in
             itertools.combinations_with_replacement(range(n), 2)]
    triples = [(oracle(f, g), oracle(g, f), bracket_field(J, f, g))
               for f, g in itertools.combinations(tests, 2)]
    worst = 0.0
    for lhs_f, anti_f, rhs_f in triples:
        for p in pts:
            lhs = lhs_f.value(p)
            worst = max(worst, abs(lhs - rhs_f.value(p)),
                        abs(lhs + anti_f.value(p)))
    if worst > tol:
        raise InconsistentOracle(
            f"bracket oracle is not first-order/antisymmetric "
            f"(residual {worst:.2e})")
    return J


def conformal_change(J, c, pts=None, tol=1e-8):
    """The unique pair J' with {cf, cg}_J = c {f,g}_J' for nowhere-zero c.

    Computed by extracting from the oracle (f,g) ↦ c⁻¹ {cf, cg}_J.
    """
    c = as_field(J.chart.dim, c)
    if pts is None:
        from .chart import sample_points
        pts = sample_points(J.chart, 5, seed=101)

    def oracle(f, g):
        return bracket_field(J, c * f, c * g) / c

    return extract_pair_from_bracket(oracle, J.chart, pts, tol)
