"""Affine matrix expressions over Hermitian and general complex variables.

An :class:`Expr` of shape ``(r, c)`` stores ``vec(E) = const + sum_v T_v @ x_v``
where ``vec`` is row-major and ``x_v`` are the *real* coordinates of variable
``v``.  Hermitian variables of size ``n`` have ``n**2`` coordinates: the
diagonal first, then ``(Re V_pq, Im V_pq)`` for each ``p < q`` in row-major
order.  General complex variables have ``2 n**2`` coordinates, ``(Re, Im)``
per entry.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from ..qcore import DimensionError, ptranspose_permutation

HERMITIAN = "hermitian"
COMPLEX = "complex_general"

_ids = itertools.count()


@lru_cache(maxsize=64)
def hermitian_basis(n: int) -> sp.csr_matrix:
    """Map ``coords -> vec(V)`` for an ``n x n`` Hermitian ``V``."""
    rows, cols, vals = [], [], []
    for p in range(n):
        rows.append(p * n + p)
        cols.append(p)
        vals.append(1.0)
    k = n
    for p in range(n):
        for q in range(p + 1, n):
            rows += [p * n + q, q * n + p, p * n + q, q * n + p]
            cols += [k, k, k + 1, k + 1]
            vals += [1.0, 1.0, 1j, -1j]
            k += 2
    return sp.csr_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=(n * n, n * n))


@lru_cache(maxsize=64)
def hermitian_coords(n: int) -> sp.csr_matrix:
    """Complex map ``vec(E) -> coords`` whose real part reads Hermitian coordinates.

    ``Re(hermitian_coords(n) @ vec(E))`` gives ``E_pp``, ``Re E_pq``, ``Im E_pq``.
    """
    rows, cols, vals = [], [], []
    for p in range(n):
        rows.append(p)
        cols.append(p * n + p)
        vals.append(1.0)
    k = n
    for p in range(n):
        for q in range(p + 1, n):
            rows += [k, k + 1]
            cols += [p * n + q, p * n + q]
            vals += [1.0, -1j]
            k += 2
    return sp.csr_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=(n * n, n * n))


def hermitian_from_coords(c, n: int) -> np.ndarray:
    return (hermitian_basis(n) @ np.asarray(c, dtype=float)).reshape(n, n)


class Variable:
    """A matrix variable; create through :meth:`ConicProgram.variable`."""

    def __init__(self, name: str, dim: int, kind: str = HERMITIAN):
        if kind not in (HERMITIAN, COMPLEX):
            raise ValueError(f"unknown variable kind {kind!r}")
        if dim < 1:
            raise DimensionError("variable dimension must be positive")
        self.name = name
        self.dim = int(dim)
        self.kind = kind
        self.uid = next(_ids)

    @property
    def ncoords(self) -> int:
        return self.dim ** 2 * (1 if self.kind == HERMITIAN else 2)

    def basis(self) -> sp.csr_matrix:
        n = self.dim
        if self.kind == HERMITIAN:
            return hermitian_basis(n)
        eye = sp.identity(n * n, format="csr", dtype=complex)
        return sp.hstack([eye, 1j * eye], format="csr")[:, _interleave(n * n)]

    def from_coords(self, c) -> np.ndarray:
        return (self.basis() @ np.asarray(c, dtype=float)).reshape(self.dim, self.dim)

    def expr(self) -> "Expr":
        e = Expr((self.dim, self.dim), None, {self: self.basis()})
        e.source = self
        return e

    def __hash__(self):
        return self.uid

    def __eq__(self, other):
        return self is other

    def __repr__(self):
        return f"Variable({self.name!r}, {self.dim}, {self.kind})"


@lru_cache(maxsize=64)
def _interleave(m: int) -> np.ndarray:
    # columns [re_0..re_m-1, im_0..im_m-1] -> [re_0, im_0, re_1, im_1, ...]
    return np.stack([np.arange(m), m + np.arange(m)], axis=1).ravel()


def as_expr(x) -> "Expr":
    if isinstance(x, Expr):
        return x
    if isinstance(x, Variable):
        return x.expr()
    arr = np.asarray(x, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise DimensionError("constants must be scalars or matrices")
    return Expr(arr.shape, arr, {})


class Expr:
    """Affine complex matrix expression (see module docstring)."""

    __array_ufunc__ = None

    def __init__(self, shape, const, terms):
        self.shape = (int(shape[0]), int(shape[1]))
        size = self.shape[0] * self.shape[1]
        self.const = np.zeros(size, dtype=complex) if const is None else np.asarray(const, dtype=complex).reshape(size)
        self.terms = {v: sp.csr_matrix(t) for v, t in terms.items()}
        self.source = None

    @property
    def size(self) -> int:
        return self.shape[0] * self.shape[1]

    @property
    def variables(self):
        return list(self.terms)

    def _map(self, op):
        """Apply a linear map (sparse, size_out x size) to the vectorized expression."""
        return {v: op @ t for v, t in self.terms.items()}, op @ self.const

    def _linear(self, op, shape):
        terms, const = self._map(op)
        return Expr(shape, const, terms)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        other = as_expr(other)
        if other.shape != self.shape:
            if other.shape == (1, 1) and self.shape[0] == self.shape[1] and not other.terms:
                other = as_expr(other.const[0] * np.eye(self.shape[0]))
            else:
                raise DimensionError(f"shape mismatch {self.shape} vs {other.shape}")
        terms = dict(self.terms)
        for v, t in other.terms.items():
            terms[v] = terms[v] + t if v in terms else t
        return Expr(self.shape, self.const + other.const, terms)

    __radd__ = __add__

    def __neg__(self):
        return Expr(self.shape, -self.const, {v: -t for v, t in self.terms.items()})

    def __sub__(self, other):
        return self + (-as_expr(other))

    def __rsub__(self, other):
        return as_expr(other) + (-self)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            raise TypeError("use @ for matrix products; * is scalar multiplication only")
        return Expr(self.shape, scalar * self.const, {v: scalar * t for v, t in self.terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __matmul__(self, other):
        if isinstance(other, (Expr, Variable)):
            raise TypeError("products of two expressions are not affine")
        d = np.asarray(other, dtype=complex)
        r, c = self.shape
        if d.shape[0] != c:
            raise DimensionError(f"cannot multiply {self.shape} by {d.shape}")
        op = sp.kron(sp.identity(r), sp.csr_matrix(d.T), format="csr")
        return self._linear(op, (r, d.shape[1]))

    def __rmatmul__(self, other):
        cm = np.asarray(other, dtype=complex)
        r, c = self.shape
        if cm.shape[1] != r:
            raise DimensionError(f"cannot multiply {cm.shape} by {self.shape}")
        op = sp.kron(sp.csr_matrix(cm), sp.identity(c), format="csr")
        return self._linear(op, (cm.shape[0], c))

    def times(self, m):
        """Scalar expression times a constant matrix."""
        if self.shape != (1, 1):
            raise DimensionError("times() needs a scalar expression")
        m = np.asarray(m, dtype=complex)
        return self._linear(sp.csr_matrix(m.reshape(-1, 1)), m.shape)

    def __getitem__(self, key):
        r, c = self.shape
        idx = np.arange(r * c).reshape(r, c)[key]
        if idx.ndim != 2:
            raise DimensionError("slicing must keep two dimensions")
        sel = idx.ravel()
        op = sp.csr_matrix((np.ones(sel.size), (np.arange(sel.size), sel)), shape=(sel.size, r * c))
        return self._linear(op, idx.shape)

    # structural ops -------------------------------------------------------
    def _permute(self, perm, shape):
        n = perm.size
        op = sp.csr_matrix((np.ones(n), (np.arange(n), perm)), shape=(n, n))
        return self._linear(op, shape)

    @property
    def T(self):
        r, c = self.shape
        perm = np.arange(r * c).reshape(r, c).T.ravel()
        return self._permute(perm, (c, r))

    def conj(self):
        return Expr(self.shape, self.const.conj(), {v: t.conj() for v, t in self.terms.items()})

    @property
    def H(self):
        return self.T.conj()

    def ptranspose(self, dims, subsystem: int = 1):
        dims = [int(d) for d in dims]
        if self.shape[0] != self.shape[1] or int(np.prod(dims)) != self.shape[0]:
            raise DimensionError(f"dims {dims} do not match expression shape {self.shape}")
        return self._permute(ptranspose_permutation(dims, subsystem), self.shape)

    def trace(self):
        r, c = self.shape
        if r != c:
            raise DimensionError("trace of a non-square expression")
        diag = np.arange(r) * (r + 1)
        op = sp.csr_matrix((np.ones(r), (np.zeros(r, dtype=int), diag)), shape=(1, r * r))
        return self._linear(op, (1, 1))

    @property
    def real(self):
        return (self + self.conj()) * 0.5

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        if self.shape[0] != self.shape[1]:
            return False
        diff = self - self.H
        if np.max(np.abs(diff.const), initial=0) > tol:
            return False
        return all(abs(t).max() <= tol if t.nnz else True for t in diff.terms.values())

    def value(self, values: dict) -> np.ndarray:
        """Evaluate with ``values`` mapping Variable -> matrix."""
        out = self.const.copy()
        for v, t in self.terms.items():
            x = np.asarray(values[v], dtype=complex)
            out += t @ _coords_of(v, x)
        return out.reshape(self.shape)

    def __repr__(self):
        names = ", ".join(v.name for v in self.terms)
        return f"Expr(shape={self.shape}, vars=[{names}])"


def _coords_of(v: Variable, x: np.ndarray) -> np.ndarray:
    vec = x.reshape(-1)
    if v.kind == HERMITIAN:
        return (hermitian_coords(v.dim) @ vec).real
    return np.stack([vec.real, vec.imag], axis=1).ravel()


def bmat(blocks) -> Expr:
    """Assemble a block matrix from expressions and constants (``None`` = zeros)."""
    rows = len(blocks)
    cols = len(blocks[0])
    heights = [None] * rows
    widths = [None] * cols
    for i in range(rows):
        for j in range(cols):
            b = blocks[i][j]
            if b is None:
                continue
            e = as_expr(b)
            heights[i] = heights[i] or e.shape[0]
            widths[j] = widths[j] or e.shape[1]
    if None in heights or None in widths:
        raise DimensionError("every block row and column needs at least one sized block")
    R, C = sum(heights), sum(widths)
    roff = np.concatenate([[0], np.cumsum(heights)])
    coff = np.concatenate([[0], np.cumsum(widths)])
    out = Expr((R, C), None, {})
    for i in range(rows):
        for j in range(cols):
            b = blocks[i][j]
            if b is None:
                continue
            e = as_expr(b)
            if e.shape != (heights[i], widths[j]):
                raise DimensionError(f"block ({i},{j}) has shape {e.shape}, expected {(heights[i], widths[j])}")
            place = (roff[i] + np.arange(heights[i]))[:, None] * C + (coff[j] + np.arange(widths[j]))[None, :]
            place = place.ravel()
            op = sp.csr_matrix((np.ones(place.size), (place, np.arange(place.size))), shape=(R * C, e.size))
            out = out + e._linear(op, (R, C))
    return out
