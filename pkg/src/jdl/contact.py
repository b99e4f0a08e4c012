"""Contact and locally conformal symplectic structures, coorientable
rendition, with both dictionaries into Jacobi pairs.

A contact structure on an odd chart is a 1-form θ with θ∧(dθ)ⁿ nowhere
zero.  Conventions, each pinned by a unit test on the darboux3 entry:

* Reeb field E: θ(E) = 1 and i_E dθ = 0, solved as a linear system.
* Curvature form on H = ker θ: c_H = -(dθ)|_H.
* Hamiltonian field: X_f = f·E + c♯(df|_H), where c♯ inverts X ↦ c(X,·);
  equivalently X_f is the unique contact field with θ(X_f) = f.
* Bracket: {f,g} = X_f(g) - g·E(f).  (The bracket is implemented this way
  rather than as a literal pairing of θ with two vector fields, which does
  not typecheck for a 1-form; consistency with the Jacobi-pair formula is
  enforced by test.)

The l.c.s. dictionary uses d∇f = df - f·η and ω♯ inverting X ↦ ω(·, X);
this slot choice makes the even transitive dictionary reproduce both the
bracket and the Hamiltonian fields of the underlying Jacobi pair, and is
re-pinned by the leaf-relation test on the hopf entry.
"""
from __future__ import annotations

import itertools

import numpy as np

from .calculus import (KForm, VectorField, exterior_d, exterior_d_form,
                       interior_form, lie_derivative, wedge_form)
from .errors import (DegenerateCurvature, EvenDimension, SingularOmega,
                     SingularSystem)
from .fields import Field, as_field, constant, coordinate, jet_inv, jet_solve
from .jacobi import (JacobiPair, bracket_field, extract_pair_from_bracket,
                     hamiltonian_field)
from .jets import Jet
from .linalg import BilinearForm, Subspace, span_of
from .report import CheckReport, residual_report, threshold_report

CONTACT_IDENTITY = "theta ^ (d theta)^n is a volume form"
LCS_IDENTITY = "d eta = 0, omega nondegenerate, d omega + omega ^ eta = 0"


class ContactStructure:
    """A contact form θ on an odd-dimensional chart."""

    def __init__(self, chart, theta):
        if chart.dim % 2 == 0:
            raise EvenDimension(f"chart {chart.name!r} has even dim {chart.dim}")
        self.chart = chart
        if isinstance(theta, dict):
            theta = KForm(chart, 1, theta)
        self.theta = theta
        self.n = (chart.dim - 1) // 2
        self._theta_fields = None
        self._d_fields = None
        self._reeb_field = None

    def theta_fields(self):
        if self._theta_fields is None:
            self._theta_fields = [_theta_comp(self, i)
                                  for i in range(self.chart.dim)]
        return self._theta_fields

    def d_fields(self):
        if self._d_fields is None:
            self._d_fields = _dtheta_fields(self)
        return self._d_fields

    def theta_covector(self, p):
        return np.array([self.theta.coeff((i,), p)
                         for i in range(self.chart.dim)])

    def dtheta_matrix(self, p):
        d = exterior_d(self.theta, p)
        n = self.chart.dim
        M = np.zeros((n, n))
        for (i, j), v in d.items():
            M[i, j] = v
            M[j, i] = -v
        return M

    def __repr__(self):
        return f"ContactStructure(chart={self.chart.name!r})"


def volume_coefficient(C, p):
    """Top coefficient of θ∧(dθ)ⁿ at p."""
    form = C.theta
    dtheta = exterior_d_form(C.theta)
    for _ in range(C.n):
        form = wedge_form(form, dtheta)
    return form.coeff(tuple(range(C.chart.dim)), p)


def check_contact(C, pts, tol=1e-8):
    """Pass iff min |top coefficient of θ∧(dθ)ⁿ| over pts exceeds tol."""
    vals = [(p, volume_coefficient(C, p)) for p in pts]
    return threshold_report("contact", CONTACT_IDENTITY, vals, tol)


def reeb(C, p):
    """The unique E with θ(E) = 1 and i_E dθ = 0, by a linear solve."""
    n = C.chart.dim
    A = np.vstack([C.theta_covector(p), C.dtheta_matrix(p).T])
    b = np.zeros(n + 1)
    b[0] = 1.0
    sol, res, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    if rank < n or np.abs(A @ sol - b).max() > 1e-8:
        raise SingularSystem(f"no Reeb field at {p}: contact condition fails")
    return sol


def reeb_field(C):
    """Reeb field with jet-evaluable components (jet linear solve)."""
    if C._reeb_field is not None:
        return C._reeb_field
    n = C.chart.dim
    theta_fields = C.theta_fields()
    d_fields = C.d_fields()
    cache = {}

    def solve(p, order):
        key = (p.tobytes(), order)
        if key in cache:
            return cache[key]
        A = np.empty((n + 1, n), dtype=object)
        for j in range(n):
            A[0, j] = theta_fields[j](p, order)
        for r in range(n):
            for j in range(n):
                A[r + 1, j] = d_fields[j][r](p, order)  # dθ(e_j, e_r)
        sq, rhs = _best_square(A, n, p, order)
        sol = jet_solve(sq, rhs)
        cache[key] = sol
        return sol

    C._reeb_field = VectorField(
        C.chart, [Field(n, lambda p, o, i=i: solve(p, o)[i]) for i in range(n)])
    return C._reeb_field


def _best_square(A, n, p, order):
    """Pick n rows of the (n+1)-row jet system with the best conditioning."""
    vals = np.array([[x.value if isinstance(x, Jet) else float(x)
                      for x in row] for row in A])
    rhs_full = np.zeros(n + 1)
    rhs_full[0] = 1.0
    best, best_rows = None, None
    for drop in range(1, n + 1):
        rows = [r for r in range(n + 1) if r != drop]
        M = vals[rows]
        s = np.linalg.svd(M, compute_uv=False)
        score = s[-1]
        if best is None or score > best:
            best, best_rows = score, rows
    sq = [[A[r][j] for j in range(n)] for r in best_rows]
    rhs = [Jet.constant(rhs_full[r], n, order) for r in best_rows]
    return sq, rhs


def _theta_comp(C, i):
    f, sign = C.theta.component((i,))
    if f is None:
        return constant(C.chart.dim, 0.0)
    return f if sign == 1 else -f


def _dtheta_fields(C):
    """dθ(e_i, e_j) as fields, full matrix of them."""
    d = exterior_d_form(C.theta)
    n = C.chart.dim
    out = [[None] * n for _ in range(n)]
    zero = constant(n, 0.0)
    for i in range(n):
        for j in range(n):
            if i == j:
                out[i][j] = zero
                continue
            f, sign = d.component((i, j)) if i < j else d.component((j, i))
            if f is None:
                out[i][j] = zero
            else:
                out[i][j] = f if (sign if i < j else -sign) == 1 else -f
    return out


def curvature_form(C, p, tol=1e-10):
    """Basis of H = ker θ_p and the matrix of c = -(dθ)|_H in that basis."""
    theta_p = C.theta_covector(p)
    H = span_of([v for v in np.linalg.svd(theta_p.reshape(1, -1))[2][1:]],
                ambient=C.chart.dim)
    # svd row trick above returns an orthonormal basis of ker θ_p
    B = H.basis
    c = -(B.T @ C.dtheta_matrix(p) @ B)
    if abs(np.linalg.det(c)) < tol:
        raise DegenerateCurvature(f"curvature degenerate at {p}")
    return H, BilinearForm(c)


def contact_hamiltonian_vf(C, f, p):
    """X_f(p) = f(p)·Reeb(p) + c♯(df|_H), the c♯ solve done in the H-basis."""
    return contact_hamiltonian_field(C, f).at(p)


def contact_hamiltonian_field(C, f):
    """X_f as a jet-evaluable vector field.

    Solved from the full-chart linear system [θ; dθ]·X = [f; -df + df(E)θ]
    equivalent to θ(X) = f and (i_X dθ)|_H = -df|_H; implemented as the
    regular square system θ(X) = f, i_X dθ = -df + E(f)·θ, whose unique
    solution is the contact Hamiltonian field.
    """
    n = C.chart.dim
    f = as_field(n, f)
    theta_fields = C.theta_fields()
    d_fields = C.d_fields()
    Ef = _reeb_apply(C, f)
    fpartials = [f.partial(r) for r in range(n)]
    cache = {}

    def solve(p, order):
        key = (p.tobytes(), order)
        if key in cache:
            return cache[key]
        A = np.empty((n + 1, n), dtype=object)
        rhs = np.empty(n + 1, dtype=object)
        for j in range(n):
            A[0, j] = theta_fields[j](p, order)
        rhs[0] = f(p, order)
        efj = Ef(p, order)
        for r in range(n):
            for j in range(n):
                A[r + 1, j] = d_fields[j][r](p, order)
            rhs[r + 1] = -(fpartials[r](p, order)) + efj * theta_fields[r](p, order)
        vals = np.array([[x.value if isinstance(x, Jet) else float(x)
                          for x in row] for row in A])
        best, best_rows = None, None
        for drop in range(n + 1):
            rows = [r for r in range(n + 1) if r != drop]
            s = np.linalg.svd(vals[rows], compute_uv=False)
            if best is None or s[-1] > best:
                best, best_rows = s[-1], rows
        sq = [[A[r][j] for j in range(n)] for r in best_rows]
        b = [rhs[r] for r in best_rows]
        sol = jet_solve(sq, b)
        cache[key] = sol
        return sol

    return VectorField(
        C.chart, [Field(n, lambda p, o, i=i: solve(p, o)[i]) for i in range(n)])


def _reeb_apply(C, f):
    """E(f) as a field."""
    E = reeb_field(C)
    return E.apply_field(f)


def contact_bracket_field(C, f, g):
    """{f,g} = X_f(g) - g·E(f) as a derived field."""
    n = C.chart.dim
    f = as_field(n, f)
    g = as_field(n, g)
    Xf = contact_hamiltonian_field(C, f)
    return Xf.apply_field(g) - g * _reeb_apply(C, f)


def contact_to_jacobi(C, pts=None, tol=1e-8):
    """The nondegenerate Jacobi pair of a verified contact structure.

    Extracted from the bracket oracle (f,g) ↦ X_f(g) - g·E(f); the returned
    pair's Hamiltonian fields agree with the contact route (tested).
    """
    if pts is None:
        from .chart import sample_points
        pts = sample_points(C.chart, 5, seed=23)
    oracle = lambda f, g: contact_bracket_field(C, f, g)
    return extract_pair_from_bracket(oracle, C.chart, pts, tol)


class LcsStructure:
    """Coorientable l.c.s. data (η, ω) on an even chart."""

    def __init__(self, chart, eta, omega):
        self.chart = chart
        if isinstance(eta, dict):
            eta = KForm(chart, 1, eta)
        if isinstance(omega, dict):
            omega = KForm(chart, 2, omega)
        self.eta = eta
        self.omega = omega

    def omega_matrix(self, p):
        n = self.chart.dim
        M = np.zeros((n, n))
        for (i, j), f in self.omega.comps.items():
            v = f.value(p)
            M[i, j] = v
            M[j, i] = -v
        return M

    def eta_covector(self, p):
        return np.array([self.eta.coeff((i,), p) for i in range(self.chart.dim)])


def check_lcs(L, pts, tol=1e-8):
    """Residuals of dη, det ω (threshold), and dω + ω∧η."""
    residuals = []
    notes = ""
    domega_plus = None
    n = L.chart.dim
    if n >= 3:
        d_omega = exterior_d_form(L.omega)
        wedge_oe = wedge_form(L.omega, L.eta)
    for p in pts:
        r = 0.0
        deta = exterior_d(L.eta, p)
        r = max(r, max((abs(v) for v in deta.values()), default=0.0))
        if abs(np.linalg.det(L.omega_matrix(p))) < tol:
            raise SingularOmega(f"omega singular at {p}")
        if n >= 3:
            for key in itertools.combinations(range(n), 3):
                r = max(r, abs(d_omega.coeff(key, p) + wedge_oe.coeff(key, p)))
        residuals.append((p, r))
    if n == 2:
        notes = ("degenerate-dimension pass: all 3-forms vanish identically "
                 "in dim 2, so d omega + omega ^ eta = 0 is forced")
    return residual_report("lcs", LCS_IDENTITY, residuals, tol, notes=notes)


def lcs_hamiltonian_vf(L, f, p):
    """X_f = ω♯(d∇f) with d∇f = df - f·η and ω♯ inverting X ↦ ω(·,X)."""
    f = as_field(L.chart.dim, f)
    W = L.omega_matrix(p)
    fj = f(p, 1)
    rhs = fj.grad - fj.value * L.eta_covector(p)
    try:
        return np.linalg.solve(W, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularOmega(str(exc))


def lcs_bracket(L, f, g, p):
    """{f,g} = ω(X_f, X_g)."""
    Xf = lcs_hamiltonian_vf(L, f, p)
    Xg = lcs_hamiltonian_vf(L, g, p)
    return float(Xf @ L.omega_matrix(p) @ Xg)


def lcs_from_even_pair(J):
    """The l.c.s. structure of a transitive even Jacobi pair.

    ω = -(Π-matrix)⁻¹ entrywise (a jet-evaluable matrix inverse) and
    η = -ω♭(E); then X_f and {f,g} agree with the pair's own Hamiltonian
    fields and bracket, and (η, ω) satisfies the l.c.s. equations.
    """
    n = J.chart.dim
    pi_fields = [[None] * n for _ in range(n)]
    zero = constant(n, 0.0)
    for i in range(n):
        for j in range(n):
            if i == j:
                pi_fields[i][j] = zero
            else:
                f, sign = J.Pi.component((i, j))
                pi_fields[i][j] = zero if f is None else (f if sign == 1 else -f)

    def omega_entry(i, j):
        def ev(p, order):
            P = [[pi_fields[a][b](p, order) for b in range(n)] for a in range(n)]
            W = jet_inv(P)
            return -W[i][j]
        return Field(n, ev)

    omega_comps = {(i, j): omega_entry(i, j)
                   for i, j in itertools.combinations(range(n), 2)}
    omega = KForm(J.chart, 2, omega_comps)

    def eta_entry(j):
        def ev(p, order):
            P = [[pi_fields[a][b](p, order) for b in range(n)] for a in range(n)]
            W = jet_inv(P)
            Ej = [c(p, order) for c in J.E.comps]
            acc = Jet.constant(0.0, n, order)
            for i in range(n):
                # η = -ω♭(E) with ω = -P⁻¹, i.e. η_j = Σ_i (P⁻¹)_{ji} E^i;
                # pinned by X_1 = E in the route-agreement test
                acc = acc + W[j][i] * Ej[i]
            return acc
        return Field(n, ev)

    eta = KForm(J.chart, 1, {(j,): eta_entry(j) for j in range(n)})
    return LcsStructure(J.chart, eta, omega)


def contact_field_property(C, f, p, tol=1e-10):
    """Rank-1 test on [θ_p; (L_{X_f}θ)_p]: X_f is a contact vector field."""
    Xf = contact_hamiltonian_field(C, as_field(C.chart.dim, f))
    L = lie_derivative(Xf, C.theta, p)
    row = np.array([L[(i,)] for i in range(C.chart.dim)])
    M = np.vstack([C.theta_covector(p), row])
    s = np.linalg.svd(M, compute_uv=False)
    return s[1] / max(s[0], 1e-30)
