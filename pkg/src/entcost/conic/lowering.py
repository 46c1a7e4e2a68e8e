"""Lowering of :class:`ConicProgram` to real standard form.

Standard form::

    minimize  c @ x   subject to  A @ x = b,  x in K

with ``x = [lp | vec(Y_1) | ... | vec(Y_k) | free]``.  ``lp`` is a nonnegative
orthant, every ``Y_j`` is a real symmetric PSD block stored as a full
row-major ``vec`` and ``free`` is unconstrained.  A complex Hermitian block
``V`` of size ``n`` is represented by a real ``2n`` block ``Y`` and read back
through the J-averaged map ``A = (Y11 + Y22)/2``, ``B = (Y21 - Y12)/2``.
Because every constraint only sees the averaged part, the structural
constraints ``Y11 = Y22``, ``Y12 = -Y21`` can be dropped without changing
the optimal value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .expressions import HERMITIAN, Variable, hermitian_coords
from .program import EQ, PSD, TRACE, ConicProgram


@lru_cache(maxsize=64)
def embedded_reader(n: int) -> sp.csr_matrix:
    """Real map ``vec(Y) -> Hermitian coordinates`` for a ``2n`` symmetric ``Y``."""
    m = 2 * n
    rows, cols, vals = [], [], []

    def put(k, i, j, w):
        rows.append(k)
        cols.append(i * m + j)
        vals.append(w)

    for p in range(n):
        put(p, p, p, 0.5)
        put(p, p + n, p + n, 0.5)
    k = n
    for p in range(n):
        for q in range(p + 1, n):
            for i, j in ((p, q), (q, p), (p + n, q + n), (q + n, p + n)):
                put(k, i, j, 0.25)
            put(k + 1, p + n, q, 0.25)
            put(k + 1, q, p + n, 0.25)
            put(k + 1, p, q + n, -0.25)
            put(k + 1, q + n, p, -0.25)
            k += 2
    return sp.csr_matrix((vals, (rows, cols)), shape=(n * n, m * m))


@dataclass
class Block:
    """Where a complex Hermitian cone block lives in ``x``."""

    name: str
    dim: int          # complex dimension n; real block is 2n
    offset: int       # start of vec(Y) in x


@dataclass
class StandardForm:
    c: np.ndarray
    A: sp.csr_matrix
    b: np.ndarray
    n_lp: int
    sdp_dims: list
    n_free: int
    obj_sign: float = 1.0
    obj_offset: float = 0.0
    # bookkeeping for recovery
    var_maps: dict = field(default_factory=dict)        # Variable -> (ncoords x N) sparse real
    con_rows: dict = field(default_factory=dict)        # constraint name -> (row indices, kind info)
    con_cones: dict = field(default_factory=dict)       # constraint name -> ("lp", idx) | ("sdp", k)
    infeasible_rows: list = field(default_factory=list)

    @property
    def n(self):
        return self.A.shape[1]

    @property
    def sdp_offsets(self):
        off = [self.n_lp]
        for d in self.sdp_dims:
            off.append(off[-1] + d * d)
        return off

    def split(self, x):
        """Split a standard-form vector into (lp, [blocks], free)."""
        off = self.sdp_offsets
        blocks = [x[off[k]:off[k + 1]].reshape(d, d) for k, d in enumerate(self.sdp_dims)]
        return x[: self.n_lp], blocks, x[off[-1]:]

    def to_dict(self) -> dict:
        coo = self.A.tocoo()
        return {
            "format": "entcost-standard-form-v1",
            "sense": "minimize",
            "vec_convention": "row-major full symmetric blocks",
            "cones": {"lp": self.n_lp, "sdp": list(self.sdp_dims), "free": self.n_free},
            "A": {"shape": list(self.A.shape), "rows": coo.row.tolist(), "cols": coo.col.tolist(),
                  "vals": coo.data.tolist()},
            "b": self.b.tolist(),
            "c": self.c.tolist(),
            "objective_sign": self.obj_sign,
            "objective_offset": self.obj_offset,
        }


def _hcoord_rows(expr):
    """Real rows giving the Hermitian coordinates of a square expression."""
    hc = hermitian_coords(expr.shape[0])
    terms = {v: (hc @ t).real for v, t in expr.terms.items()}
    return terms, (hc @ expr.const).real


def _general_rows(expr):
    terms = {v: sp.vstack([t.real, t.imag]) for v, t in expr.terms.items()}
    return terms, np.concatenate([expr.const.real, expr.const.imag])


def lower(prog: ConicProgram) -> StandardForm:
    # 1. decide the cone structure
    cone_var = {}          # Variable -> constraint name
    lp_cons, sdp_cons = [], []
    for con in prog.constraints:
        if con.kind != PSD:
            if con.kind == TRACE:
                lp_cons.append(con)
            continue
        src = con.expr.source
        if isinstance(src, Variable) and src.kind == HERMITIAN and src not in cone_var:
            cone_var[src] = con.name
            sdp_cons.append((con, src))
        elif con.expr.shape == (1, 1):
            lp_cons.append(con)
        else:
            sdp_cons.append((con, None))

    n_lp = len(lp_cons)
    sdp_dims = [2 * con.expr.shape[0] for con, _ in sdp_cons]
    offsets = [n_lp]
    for d in sdp_dims:
        offsets.append(offsets[-1] + d * d)
    free_vars = [v for v in prog.variables if v not in cone_var]
    n_free = sum(v.ncoords for v in free_vars)
    N = offsets[-1] + n_free

    def block_reader(k):
        n = sdp_dims[k] // 2
        R = embedded_reader(n).tocoo()
        return sp.csr_matrix((R.data, (R.row, R.col + offsets[k])), shape=(n * n, N))

    var_maps = {}
    for k, (con, src) in enumerate(sdp_cons):
        if src is not None:
            var_maps[src] = block_reader(k)
    off = offsets[-1]
    for v in free_vars:
        m = v.ncoords
        var_maps[v] = sp.csr_matrix((np.ones(m), (np.arange(m), off + np.arange(m))), shape=(m, N))
        off += m

    def rows_of(terms):
        out = sp.csr_matrix((next(iter(terms.values())).shape[0] if terms else 0, N))
        for v, t in terms.items():
            out = out + sp.csr_matrix(t) @ var_maps[v]
        return out

    blocks_A, blocks_b = [], []
    con_rows, con_cones = {}, {}
    row = 0

    def add_rows(name, A_part, b_part, kind):
        nonlocal row
        A_part = sp.csr_matrix(A_part)
        blocks_A.append(A_part)
        blocks_b.append(np.asarray(b_part, dtype=float))
        con_rows[name] = (np.arange(row, row + A_part.shape[0]), kind)
        row += A_part.shape[0]

    lp_index = {con.name: i for i, con in enumerate(lp_cons)}
    for con in prog.constraints:
        e = con.expr
        if con.kind == EQ:
            if con.hermitian:
                terms, const = _hcoord_rows(e)
                kind = "hermitian"
            else:
                terms, const = _general_rows(e)
                kind = "general"
            if not terms:
                terms = {}
            Ap = rows_of(terms) if terms else sp.csr_matrix((const.size, N))
            add_rows(con.name, Ap, -const, (kind, e.shape))
        elif con.kind == TRACE:
            i = lp_index[con.name]
            Ap = (rows_of({v: t.real for v, t in e.terms.items()}) if e.terms else sp.csr_matrix((1, N))).tolil()
            Ap[0, i] = 1.0
            add_rows(con.name, Ap, [con.bound - e.const[0].real], ("trace", None))
            con_cones[con.name] = ("lp", i)
        elif con.kind == PSD:
            if con.name in lp_index:
                i = lp_index[con.name]
                Ap = (rows_of({v: t.real for v, t in e.terms.items()}) if e.terms else sp.csr_matrix((1, N))).tolil()
                Ap[0, i] = -1.0
                add_rows(con.name, Ap, [-e.const[0].real], ("scalar_psd", None))
                con_cones[con.name] = ("lp", i)
                continue
            k = next(j for j, (c2, _) in enumerate(sdp_cons) if c2 is con)
            con_cones[con.name] = ("sdp", k)
            if sdp_cons[k][1] is not None:
                continue
            terms, const = _hcoord_rows(e)
            Ap = rows_of(terms) if terms else sp.csr_matrix((const.size, N))
            Ap = Ap - block_reader(k)
            add_rows(con.name, Ap, -const, ("psd_slack", e.shape))

    A = sp.vstack(blocks_A, format="csr") if blocks_A else sp.csr_matrix((0, N))
    b = np.concatenate(blocks_b) if blocks_b else np.zeros(0)
    A.eliminate_zeros()

    # objective
    sign = -1.0 if prog.sense == "max" else 1.0
    obj = prog.objective
    c = np.zeros(N)
    if obj.terms:
        c = sign * np.asarray(rows_of({v: t.real for v, t in obj.terms.items()}).todense()).ravel()
    offset = obj.const[0].real

    # drop empty rows; a nonzero right-hand side on an empty row is infeasible
    nnz = np.diff(A.indptr)
    empty = nnz == 0
    bad = np.where(empty & (np.abs(b) > 1e-12))[0].tolist()
    keep = np.where(~empty)[0]
    remap = -np.ones(A.shape[0], dtype=int)
    remap[keep] = np.arange(keep.size)
    con_rows = {k: (remap[r], kind) for k, (r, kind) in con_rows.items()}
    A = A[keep]
    b = b[keep]

    return StandardForm(c=c, A=A, b=b, n_lp=n_lp, sdp_dims=sdp_dims, n_free=n_free,
                        obj_sign=sign, obj_offset=offset, var_maps=var_maps,
                        con_rows=con_rows, con_cones=con_cones, infeasible_rows=bad)


def recover_variables(sf: StandardForm, x: np.ndarray) -> dict:
    return {v: v.from_coords(P @ x) for v, P in sf.var_maps.items()}


def recover_duals(sf: StandardForm, prog: ConicProgram, y: np.ndarray, z: np.ndarray) -> dict:
    """Complex multipliers per constraint name.

    Equality multipliers are returned as the matrix ``L`` with
    ``Re tr(L E) = sum(y_rows * rows(E))`` (Hermitian) or as the complex
    matrix of ``y_re + i y_im`` (general).  PSD multipliers are
    ``2 * unembed(Z)`` so that ``<Z, embed(V)> = Re tr(L V)``.
    """
    from .program import unembed

    out = {}
    lp, blocks, _ = sf.split(z)
    for con in prog.constraints:
        name = con.name
        if name in sf.con_cones:
            kind, idx = sf.con_cones[name]
            out[name] = np.array([[lp[idx]]], dtype=complex) if kind == "lp" else 2 * unembed(blocks[idx])
            continue
        rows, (kind, shape) = sf.con_rows[name]
        yy = np.where(rows >= 0, y[np.clip(rows, 0, None)] if y.size else 0.0, 0.0)
        if kind == "hermitian":
            n = shape[0]
            L = np.zeros((n, n), dtype=complex)
            L[np.diag_indices(n)] = yy[:n]
            k = n
            for p in range(n):
                for q in range(p + 1, n):
                    L[p, q] = (yy[k] + 1j * yy[k + 1]) / 2
                    L[q, p] = np.conj(L[p, q])
                    k += 2
            out[name] = L
        else:
            half = yy.size // 2
            out[name] = (yy[:half] + 1j * yy[half:]).reshape(shape)
    return out


def objective_vector(sf: StandardForm, expr, sense: str = "min") -> np.ndarray:
    """Standard-form cost vector for a new objective on an already lowered program."""
    sign = -1.0 if sense == "max" else 1.0
    c = np.zeros(sf.n)
    for v, t in expr.terms.items():
        c += sign * np.asarray((sp.csr_matrix(t.real) @ sf.var_maps[v]).todense()).ravel()
    return c
