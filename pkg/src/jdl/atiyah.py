"""The trivial-bundle gauge algebroid: derivations TM ⊕ R, jet pairing,
der-differential, the symplectic Atiyah form, pushforwards and Hamiltonian
derivations.

On a trivialized line bundle a derivation at p is a pair (X, g) acting on
functions by f ↦ X(f) + g·f; the identity derivation is 1 = (0, 1) and the
symbol is σ(X, g) = X.  A jet element is (α, c) with pairing
⟨(X,g), (α,c)⟩ = α(X) + g·c, so j¹f at p is (df(p), f(p)).

Coordinates are fixed as (X-components..., g) with 1 the last basis vector.

The Atiyah 2-form of a contact form is computed from the Chevalley-Eilenberg
formula for d_D(θ∘σ) on constant frame extensions:

    ϖ((X,g),(Y,h)) = X(θ(Y)) + g θ(Y) - Y(θ(X)) - h θ(X) - θ([X,Y]).

Both global signs of ϖ occur in the literature; every check here is
invariant under the global sign, and the sharp-inverse check pins the slot
pairing that makes ϖ♭ ∘ J♯ the identity (ϖ♭(δ) = ϖ(·, δ)).
"""
from __future__ import annotations

import itertools
import time

import numpy as np

from .calculus import VectorField, exterior_d_form
from .chart import tangent_map
from .contact import ContactStructure, _dtheta_fields, _theta_comp
from .errors import ZeroConformalFactor
from .fields import Field, as_field, constant, coordinate
from .jacobi import JacobiPair, bracket_field, hamiltonian_field, jacobi_bracket
from .jets import Jet
from .linalg import (BilinearForm, Subspace, annihilator, full_space, kernel,
                     span_of, subspace_equal)
from .report import CheckReport, residual_report


class Derivation:
    """A derivation value (X, g) at a base point."""

    __slots__ = ("point", "X", "g")

    def __init__(self, point, X, g):
        self.point = np.asarray(point, dtype=float)
        self.X = np.asarray(X, dtype=float)
        self.g = float(g)

    @property
    def coords(self):
        return np.append(self.X, self.g)

    def symbol(self):
        return self.X

    def __repr__(self):
        return f"Derivation(X={self.X}, g={self.g})"


def identity_derivation(point, dim):
    return Derivation(point, np.zeros(dim), 1.0)


class JetElement:
    """A first-jet value (α, c) at a base point; j¹f = (df(p), f(p))."""

    __slots__ = ("point", "alpha", "c")

    def __init__(self, point, alpha, c):
        self.point = np.asarray(point, dtype=float)
        self.alpha = np.asarray(alpha, dtype=float)
        self.c = float(c)

    @property
    def coords(self):
        return np.append(self.alpha, self.c)

    def pair(self, d):
        """⟨(X,g),(α,c)⟩ = α(X) + g·c."""
        return float(self.alpha @ d.X + self.g_pair(d))

    def g_pair(self, d):
        return d.g * self.c


def jet_of(f, p):
    f = as_field(len(np.asarray(p)), f)
    j = f(p, 1)
    return JetElement(p, j.grad, j.value)


def pairing(d, j):
    """Natural duality pairing between derivation and jet coordinates."""
    return float(d.coords @ j.coords)


class DerivationField:
    """Derivation-valued field: a vector field plus a scalar field."""

    def __init__(self, chart, X, g):
        self.chart = chart
        self.X = X if isinstance(X, VectorField) else VectorField(chart, X)
        self.g = as_field(chart.dim, g)

    def at(self, p):
        return Derivation(p, self.X.at(p), self.g.value(p))

    def apply_field(self, f):
        """(X, g) acting on a function field: X(f) + g f."""
        return self.X.apply_field(f) + self.g * f


def der_bracket(d1, d2, p):
    """[(X,g),(Y,h)] = ([X,Y], X(h) - Y(g)) at p, for derivation fields."""
    from .calculus import lie_bracket
    Xc = lie_bracket(d1.X, d2.X, p)
    gc = d1.X.apply_field(d2.g).value(p) - d2.X.apply_field(d1.g).value(p)
    return Derivation(p, Xc, gc)


def varpi_matrix(C, p):
    """Matrix of ϖ on the frame {(∂_i, 0)} ∪ {1} at p.

    Entries ϖ((∂i,0),(∂j,0)) = dθ_ij, ϖ((∂i,0),1) = -θ_i, ϖ(1,·) = +θ.
    """
    n = C.chart.dim
    M = np.zeros((n + 1, n + 1))
    M[:n, :n] = C.dtheta_matrix(p)
    th = C.theta_covector(p)
    M[:n, n] = -th
    M[n, :n] = th
    return M


def varpi_from_theta(C, p):
    return BilinearForm(varpi_matrix(C, p))


def varpi_entry_fields(C):
    """All entries of ϖ as jet-evaluable fields (for d_D-closedness)."""
    n = C.chart.dim
    d = _dtheta_fields(C)
    theta = [_theta_comp(C, i) for i in range(n)]
    zero = constant(n, 0.0)
    entries = [[zero] * (n + 1) for _ in range(n + 1)]
    for i in range(n):
        for j in range(n):
            entries[i][j] = d[i][j]
        entries[i][n] = -theta[i]
        entries[n][i] = theta[i]
    return entries


def jacobi_bidiff_matrix(J, p):
    """Matrix of the bi-differential-operator pairing on jet coordinates.

    J((α,c),(β,e)) = Π(α,β) + c·β(E) - e·α(E).
    """
    n = J.chart.dim
    M = np.zeros((n + 1, n + 1))
    M[:n, :n] = J.pi_matrix(p)
    Ev = J.E.at(p)
    M[n, :n] = Ev
    M[:n, n] = -Ev
    return M


def jacobi_bidiff(J, j1, j2):
    """Evaluate the bi-DO on two jet elements at the same point."""
    M = jacobi_bidiff_matrix(J, j1.point)
    return float(j1.coords @ M @ j2.coords)


def bidiff_sharp(J, p):
    """J♯: jet coordinates → derivation coordinates, ⟨J♯α, β⟩ = J(α,β)."""
    return jacobi_bidiff_matrix(J, p).T


def varpi_flat(C, p):
    """ϖ♭: derivation coordinates → jet coordinates, ϖ♭(δ) = ϖ(·, δ).

    This slot makes ϖ♭ ∘ J♯ the identity for the pair induced by C.
    """
    return varpi_matrix(C, p)


def check_sharp_inverse(C, J, pts, tol=1e-9):
    """Operator-norm residual of ϖ♭ ∘ J♯ - id on jet coordinates."""
    residuals = []
    for p in pts:
        M = varpi_flat(C, p) @ bidiff_sharp(J, p) - np.eye(C.chart.dim + 1)
        residuals.append((p, float(np.abs(M).max())))
    return residual_report(
        "sharp_inverse", "varpi_flat . J_sharp = id on jet coordinates",
        residuals, tol)


def gauge_pushforward(Phi, d, check_oracle=False, probes=None):
    """DΦ(X, g) = (Tφ·X, g + X(a)/a) at d.point, for a conformal map Phi.

    With ``check_oracle`` the closed form is validated against the
    definitional action (DΦ δ)(μ) = Φ_x(δ(Φ*μ)) on probe functions μ.
    """
    p = d.point
    a = Phi.factor.value(p)
    if abs(a) <= 1e-12:
        raise ZeroConformalFactor(f"conformal factor vanishes at {p}")
    da = Phi.factor(p, 1).grad
    T = tangent_map(Phi.map, p)
    out = Derivation(Phi.map(p), T @ d.X, d.g + float(d.X @ da) / a)
    if check_oracle:
        if probes is None:
            m = Phi.map.target.dim
            probes = [constant(m, 1.0)] + [coordinate(m, i) for i in range(m)]
        for mu in probes:
            lhs = _pushforward_action(Phi, d, mu)
            ju = as_field(Phi.map.target.dim, mu)(out.point, 1)
            rhs = float(out.X @ ju.grad) + out.g * ju.value
            if abs(lhs - rhs) > 1e-8 * max(1.0, abs(rhs)):
                raise ZeroConformalFactor(
                    f"pushforward closed form disagrees with oracle: "
                    f"{lhs} vs {rhs}")
    return out


def _pushforward_action(Phi, d, mu):
    """(DΦ δ)(μ) = Φ_x(δ(Φ*μ)): the definitional oracle.

    In the trivialization, Φ* μ = a·(μ∘φ) and Φ_x multiplies by 1/a(x).
    """
    p = d.point
    pulled = Phi.pullback(mu)
    j = pulled(p, 1)
    val = float(d.X @ j.grad) + d.g * j.value
    return val / Phi.factor.value(p)


def dphi_matrix(Phi, p):
    """Matrix of DΦ in derivation coordinates (X-block, g-slot)."""
    n = Phi.map.source.dim
    m = Phi.map.target.dim
    a = Phi.factor.value(p)
    da = Phi.factor(p, 1).grad
    T = tangent_map(Phi.map, p)
    M = np.zeros((m + 1, n + 1))
    M[:m, :n] = T
    M[m, :n] = da / a
    M[m, n] = 1.0
    return M


def ker_DPhi(Phi, p):
    """ker DΦ at p: {(X, -X(a)/a) : X ∈ ker Tφ(p)} as a Subspace."""
    return kernel(dphi_matrix(Phi, p))


def hamiltonian_derivation(J, f, p, validate=False, probes=None):
    """Δ_f = (X_f, -E(f)) at p; optionally validated by Δ_f(g) = {f,g}."""
    f = as_field(J.chart.dim, f)
    X = hamiltonian_field(J, f).at(p)
    Ef = J.E.apply_field(f).value(p)
    d = Derivation(p, X, -Ef)
    if validate:
        if probes is None:
            n = J.chart.dim
            probes = [constant(n, 1.0)] + [coordinate(n, i) for i in range(n)]
        for g in probes:
            jg = as_field(J.chart.dim, g)(p, 1)
            lhs = float(d.X @ jg.grad) + d.g * jg.value
            rhs = jacobi_bracket(J, f, g, p)
            if abs(lhs - rhs) > 1e-8 * max(1.0, abs(rhs)):
                raise ZeroConformalFactor(
                    f"hamiltonian derivation disagrees with bracket: "
                    f"{lhs} vs {rhs}")
    return d


def one_perp_varpi(C, p):
    """⟨1⟩^⊥ϖ at p; equals σ⁻¹(H) = {(X,g): θ(X) = 0}."""
    W = varpi_matrix(C, p)
    one = np.zeros(C.chart.dim + 1)
    one[-1] = 1.0
    return kernel((W @ one).reshape(1, -1))


def check_one_perp_is_horizontal(C, pts, tol=1e-7):
    """Subspace equality ⟨1⟩^⊥ϖ = σ⁻¹(H) at each point."""
    residuals = []
    n = C.chart.dim
    for p in pts:
        lhs = one_perp_varpi(C, p)
        th = np.append(C.theta_covector(p), 0.0)
        rhs = kernel(th.reshape(1, -1))
        same, ang = subspace_equal(lhs, rhs, angle_tol=tol)
        residuals.append((p, ang if same else max(ang, np.pi / 2)))
    return residual_report(
        "one_perp_horizontal", "<1>^perp-varpi = sigma^{-1}(H)",
        residuals, tol)


def pullback_jet_span(Phi, p, frames=None):
    """span{j¹(Φ*λ) : λ ∈ frames} at p, in jet coordinates.

    Defaults to the constant section 1 and the target coordinates; this
    family supplies a frame plus all first-order variation.
    """
    m = Phi.map.target.dim
    if frames is None:
        frames = [constant(m, 1.0)] + [coordinate(m, i) for i in range(m)]
    vecs = []
    for lam in frames:
        j = jet_of(Phi.pullback(lam), p)
        vecs.append(j.coords)
    return span_of(vecs, ambient=Phi.map.source.dim + 1)


def hamiltonian_derivation_span(J, Phi, p, frames=None):
    """span{Δ_{Φ*λ} : λ ∈ frames} at p, in derivation coordinates."""
    m = Phi.map.target.dim
    if frames is None:
        frames = [constant(m, 1.0)] + [coordinate(m, i) for i in range(m)]
    vecs = []
    for lam in frames:
        d = hamiltonian_derivation(J, Phi.pullback(lam), p)
        vecs.append(d.coords)
    return span_of(vecs, ambient=J.chart.dim + 1)


def check_technical_lemma(Phi, J, pts, frames=None, tol=1e-7):
    """(ker DΦ)° = span{j¹(Φ*λ)} and (ker DΦ)^⊥ϖ = span{Δ_{Φ*λ}}.

    The second subspace equality is computed with the bi-DO route, i.e.
    (ker DΦ)^⊥ϖ = J♯((ker DΦ)°), which is sign-robust.
    """
    residuals = []
    for p in pts:
        K = ker_DPhi(Phi, p)
        ann = annihilator(K)
        jet_span = pullback_jet_span(Phi, p, frames)
        same1, ang1 = subspace_equal(ann, jet_span, angle_tol=tol)
        sharp = bidiff_sharp(J, p)
        perp = span_of([sharp @ ann.basis[:, k] for k in range(ann.dim)],
                       ambient=J.chart.dim + 1)
        ham_span = hamiltonian_derivation_span(J, Phi, p, frames)
        same2, ang2 = subspace_equal(perp, ham_span, angle_tol=tol)
        bad = 0.0 if (same1 and same2) else np.pi / 2
        residuals.append((p, max(ang1, ang2, bad)))
    return residual_report(
        "technical_lemma",
        "(ker DPhi)ann = span j1(pullbacks); (ker DPhi)^perp-varpi = span "
        "of hamiltonian derivations of pullbacks", residuals, tol)


# -- der-complex on the coordinate frame -------------------------------------

class AtiyahForm:
    """Atiyah k-form (k <= 2) with jet-evaluable entries on the frame
    {(∂_0,0), ..., (∂_{n-1},0), 1}."""

    def __init__(self, chart, degree, entries):
        self.chart = chart
        self.degree = degree
        self.entries = entries  # k=1: list of n+1 fields; k=2: (n+1)x(n+1)

    def value_matrix(self, p):
        n = self.chart.dim
        if self.degree == 1:
            return np.array([e.value(p) for e in self.entries])
        return np.array([[self.entries[i][j].value(p) for j in range(n + 1)]
                         for i in range(n + 1)])


def theta_sigma_form(C):
    """θ∘σ as an Atiyah 1-form."""
    n = C.chart.dim
    entries = [_theta_comp(C, i) for i in range(n)] + [constant(n, 0.0)]
    return AtiyahForm(C.chart, 1, entries)


def varpi_form(C):
    return AtiyahForm(C.chart, 2, varpi_entry_fields(C))


def der_d(form):
    """d_D of an Atiyah 1- or 2-form on the constant frame.

    Frame brackets vanish; the 1-slot acts on entry functions as the
    identity (1(f) = f), coordinate slots act as ∂_i.
    """
    n = form.chart.dim
    zero = constant(n, 0.0)

    def act(slot, field):
        return field if slot == n else field.partial(slot)

    if form.degree == 1:
        out = [[zero] * (n + 1) for _ in range(n + 1)]
        for i in range(n + 1):
            for j in range(n + 1):
                out[i][j] = act(i, form.entries[j]) - act(j, form.entries[i])
        return AtiyahForm(form.chart, 2, out)
    if form.degree == 2:
        def entry(i, j, k):
            return (act(i, form.entries[j][k])
                    - act(j, form.entries[i][k])
                    + act(k, form.entries[i][j]))
        return AtiyahForm(form.chart, 3, {"entry": entry})
    raise ValueError("der_d implemented for degrees 1 and 2")


def der_contract_one(form):
    """ι_1 of an Atiyah 1- or 2-form: slot-1 evaluation at the frame index n."""
    n = form.chart.dim
    if form.degree == 1:
        return AtiyahForm(form.chart, 0, form.entries[n])
    return AtiyahForm(form.chart, 1,
                      [form.entries[n][j] for j in range(n + 1)])


def check_varpi_closed(C, pts, tol=1e-9):
    """d_D ϖ = 0 on all frame triples."""
    n = C.chart.dim
    d3 = der_d(varpi_form(C))
    entry = d3.entries["entry"]
    fields = {}
    residuals = []
    for p in pts:
        r = 0.0
        for (i, j, k) in itertools.combinations(range(n + 1), 3):
            if (i, j, k) not in fields:
                fields[(i, j, k)] = entry(i, j, k)
            r = max(r, abs(fields[(i, j, k)].value(p)))
        residuals.append((p, r))
    return residual_report("varpi_closed", "d_D varpi = 0", residuals, tol)


def check_contracting_homotopy(form, pts, tol=1e-9):
    """(d_D ι_1 + ι_1 d_D) ω = ω on frame tuples, for k = 1 or 2."""
    n = form.chart.dim
    residuals = []
    if form.degree == 1:
        part1 = der_contract_one(der_d(form))            # (d_D ω)(1, ·)
        g = der_contract_one(form).entries               # ω(1), a field
        part2 = [g.partial(i) for i in range(n)] + [g]   # d_D of the 0-form
        for p in pts:
            r = max(abs(part1.entries[i].value(p) + part2[i].value(p)
                        - form.entries[i].value(p)) for i in range(n + 1))
            residuals.append((p, r))
    elif form.degree == 2:
        entry = der_d(form).entries["entry"]
        di1 = der_d(der_contract_one(form))
        zero = constant(n, 0.0)
        cache = {}

        def idw(a, b):
            # ι_1(d_D ω)(Δ_a, Δ_b) = (d_D ω)(1, Δ_a, Δ_b)
            if (a, b) not in cache:
                cache[(a, b)] = zero if (a == n or b == n or a == b) \
                    else entry(n, a, b)
            return cache[(a, b)]

        for p in pts:
            r = 0.0
            for a in range(n + 1):
                for b in range(n + 1):
                    v = idw(a, b).value(p) + di1.entries[a][b].value(p)
                    r = max(r, abs(v - form.entries[a][b].value(p)))
            residuals.append((p, r))
    else:
        raise ValueError("homotopy check implemented for degrees 1 and 2")
    return residual_report(
        "contracting_homotopy", "(d_D i_1 + i_1 d_D) omega = omega",
        residuals, tol)
