"""Scalar fields on charts, evaluable to jets at points.

A field is anything with ``field(p, order) -> Jet``.  :class:`ScalarFieldSpec`
wraps a plain Python expression of the coordinates; :class:`Field` wraps an
arbitrary jet-valued evaluator and supports pointwise arithmetic, exact
partial-derivative fields and composition along smooth maps.  Derived
quantities (pulled-back forms, matrix inverses computed in jet arithmetic)
therefore stay differentiable to the same order as their ingredients.
"""
from __future__ import annotations

import numpy as np

from . import jets
from .jets import Jet, jet_lift, partial_jet, taylor_compose


class Field:
    """Scalar field given by a jet evaluator ``(p, order) -> Jet``.

    Evaluations are memoized per instance: fields are immutable and derived
    field trees (nested brackets, pullbacks) revisit shared subexpressions,
    so caching turns exponential tree walks into linear ones.  Callers must
    not mutate returned jets.
    """

    __slots__ = ("dim", "_eval", "_cache")

    def __init__(self, dim, eval_jet):
        self.dim = dim
        self._eval = eval_jet
        self._cache = {}

    def __call__(self, p, order=2):
        p = np.asarray(p, dtype=float)
        key = (p.tobytes(), order)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        out = self._eval(p, order)
        if len(self._cache) > 4096:
            self._cache.clear()
        self._cache[key] = out
        return out

    def value(self, p):
        return self(p, 1).value

    def grad(self, p):
        return self(p, 1).grad

    def partial(self, i):
        """Exact ∂_i of this field (costs one extra jet order inside)."""
        def ev(p, order):
            full = self(p, order + 1)
            out = Jet(self.dim, order, full.grad[i], full.hess[i])
            if order == 2:
                out.hess = full.third[i]
            return out
        return Field(self.dim, ev)

    # pointwise ring structure; numbers promote to constants
    def _lift2(self, other, op):
        if isinstance(other, Field):
            if other.dim != self.dim:
                from .errors import DimensionMismatch
                raise DimensionMismatch("field dims differ")
            return Field(self.dim, lambda p, o: op(self(p, o), other(p, o)))
        c = float(other)
        return Field(self.dim, lambda p, o: op(self(p, o), c))

    def __add__(self, other):
        return self._lift2(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._lift2(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._lift2(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._lift2(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._lift2(other, lambda a, b: a / b)

    def __rtruediv__(self, other):
        return self._lift2(other, lambda a, b: b / a)

    def __neg__(self):
        return Field(self.dim, lambda p, o: -self(p, o))

    def __pow__(self, n):
        return Field(self.dim, lambda p, o: self(p, o) ** n)


class ScalarFieldSpec(Field):
    """Field defined by a Python expression of the coordinates.

    The expression must be closed under jet arithmetic, i.e. built from
    +, -, *, /, **, and the functions in :mod:`jdl.jets` (exp, log, sin,
    cos, sqrt, atan, atan2).
    """

    __slots__ = ("fn",)

    def __init__(self, dim, fn):
        self.fn = fn
        super().__init__(dim, lambda p, order: jet_lift(fn, p, order))


def constant(dim, c):
    c = float(c)
    return Field(dim, lambda p, order: Jet.constant(c, dim, order))


def coordinate(dim, i):
    return ScalarFieldSpec(dim, lambda *xs: xs[i])


def compose(target_field, component_fields, source_dim=None):
    """Field p ↦ target_field(F(p)) for F given by component fields.

    ``source_dim`` is required when F has no components (a map to a point
    chart); the target field is then constant.
    """
    comps = list(component_fields)
    if not comps:
        if source_dim is None:
            raise ValueError("source_dim required for a map to a point chart")
        c = target_field(np.zeros(0), 1).value
        return constant(source_dim, c)
    dim = comps[0].dim

    def ev(p, order):
        fj = [c(p, order) for c in comps]
        q = np.array([j.value for j in fj])
        gj = target_field(q, order)
        return taylor_compose(gj, fj)

    return Field(dim, ev)


def from_values(dim, fn):
    """Field from a plain float function; jets carry no derivative info.

    Only for quantities known to be locally constant; prefer ScalarFieldSpec.
    """
    return Field(dim, lambda p, order: Jet.constant(fn(p), dim, order))


def as_field(dim, obj):
    """Coerce a number, callable-on-jets, or Field to a Field."""
    if isinstance(obj, Field):
        return obj
    if callable(obj):
        return ScalarFieldSpec(dim, obj)
    return constant(dim, obj)


# -- jet-valued linear algebra ----------------------------------------------

def jet_solve(A, b):
    """Solve A x = b by Gaussian elimination in jet arithmetic.

    A is an (n, n) array of Jets (or numbers), b an (n,) or (n, m) array.
    Pivoting is by the value part.  Keeps the solution differentiable.
    """
    A = [list(row) for row in A]
    b = np.asarray(b, dtype=object)
    vec = b.ndim == 1
    B = [[b[i]] for i in range(len(b))] if vec else [list(row) for row in b]
    n = len(A)
    from .errors import SingularSystem

    def val(x):
        return x.value if isinstance(x, Jet) else float(x)

    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(val(A[r][col])))
        if abs(val(A[piv][col])) < 1e-14:
            raise SingularSystem("jet linear system is singular")
        A[col], A[piv] = A[piv], A[col]
        B[col], B[piv] = B[piv], B[col]
        inv = 1.0 / A[col][col] if not isinstance(A[col][col], Jet) \
            else A[col][col]._reciprocal()
        for r in range(n):
            if r == col:
                continue
            factor = A[r][col] * inv
            for c in range(col, n):
                A[r][c] = A[r][c] - factor * A[col][c]
            for c in range(len(B[0])):
                B[r][c] = B[r][c] - factor * B[col][c]
    out = np.empty((n, len(B[0])), dtype=object)
    for i in range(n):
        inv = 1.0 / A[i][i] if not isinstance(A[i][i], Jet) \
            else A[i][i]._reciprocal()
        for c in range(len(B[0])):
            out[i, c] = B[i][c] * inv
    return out[:, 0] if vec else out


def jet_inv(A):
    """Inverse of a square matrix of Jets via jet Gaussian elimination."""
    n = len(A)
    eye = np.empty((n, n), dtype=object)
    first = next(x for row in A for x in row if isinstance(x, Jet))
    for i in range(n):
        for j in range(n):
            eye[i, j] = Jet.constant(1.0 if i == j else 0.0, first.dim, first.order)
    return jet_solve(A, eye)
