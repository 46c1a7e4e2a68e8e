"""Solver backends operating on :class:`StandardForm`.

``reference`` is the bundled interior-point method.  ``cvxopt`` hands the
same data to ``cvxopt.solvers.conelp`` if that package is installed.
"""

from __future__ import annotations

import os

import numpy as np
import scipy.sparse as sp

from ..qcore import ValidationError
from .ipm import IPMResult, solve_standard
from .lowering import StandardForm

ENV_VAR = "ENTCOST_SOLVER"


def _reference(sf, feas_tol, gap_tol, max_iters, verbose):
    return solve_standard(sf, feas_tol=feas_tol, gap_tol=gap_tol, max_iters=max_iters, verbose=verbose)


def _cvxopt(sf: StandardForm, feas_tol, gap_tol, max_iters, verbose):
    try:
        import cvxopt
        from cvxopt import solvers
    except ImportError as exc:  # pragma: no cover - depends on environment
        raise RuntimeError("the cvxopt backend needs the 'cvxopt' package") from exc

    # cvxopt reads only the lower triangle of each 's' block, so the decision
    # vector keeps one column per lower-triangular entry.
    nl, nf = sf.n_lp, sf.n_free
    off = sf.sdp_offsets
    A = sf.A.tocsc()
    cols, G_rows, G_cols = [], [], []
    lift = []                       # (reduced column, full indices) for recovery
    g_row = 0
    nred = 0
    for i in range(nl):
        cols.append(A[:, i])
        lift.append([i])
        G_rows.append(g_row)
        G_cols.append(nred)
        g_row += 1
        nred += 1
    for k, d in enumerate(sf.sdp_dims):
        for j in range(d):          # column-major: (row i, col j), i >= j
            for i in range(j, d):
                a, b = off[k] + i * d + j, off[k] + j * d + i
                cols.append(A[:, a] + (A[:, b] if a != b else 0))
                lift.append([a, b] if a != b else [a])
                G_rows.append(g_row + j * d + i)
                G_cols.append(nred)
                nred += 1
        g_row += d * d
    for i in range(nf):
        cols.append(A[:, off[-1] + i])
        lift.append([off[-1] + i])
        nred += 1
    Ared = sp.hstack(cols, format="coo") if cols else sp.coo_matrix((sf.A.shape[0], 0))
    cred = np.array([sf.c[idx].sum() for idx in lift])
    G = sp.coo_matrix((-np.ones(len(G_rows)), (G_rows, G_cols)), shape=(g_row, nred))

    def cm(M):
        M = M.tocoo()
        return cvxopt.spmatrix(M.data.tolist(), M.row.tolist(), M.col.tolist(), size=M.shape)

    opts = {"show_progress": bool(verbose), "abstol": gap_tol * 1e-2, "reltol": gap_tol * 1e-2,
            "feastol": feas_tol * 1e-1, "maxiters": max_iters}
    dims = {"l": nl, "q": [], "s": list(sf.sdp_dims)}
    sol = solvers.conelp(cvxopt.matrix(cred), cm(G), cvxopt.matrix(np.zeros(g_row)), dims,
                         cm(Ared), cvxopt.matrix(sf.b), options=opts)
    st = {"optimal": "optimal", "primal infeasible": "infeasible",
          "dual infeasible": "unbounded"}.get(sol["status"], "inaccurate")
    N = sf.A.shape[1]
    x = np.zeros(N)
    y = np.zeros(sf.A.shape[0])
    z = np.zeros(N)
    if sol["x"] is not None:
        xr = np.array(sol["x"]).ravel()
        for v, idx in zip(xr, lift):
            for j in idx:
                x[j] = v
    if sol["y"] is not None:
        y = -np.array(sol["y"]).ravel()
    if sol["z"] is not None:
        zr = np.array(sol["z"]).ravel()
        z[:nl] = zr[:nl]
        p = nl
        for k, d in enumerate(sf.sdp_dims):
            Zk = zr[p:p + d * d].reshape(d, d).T    # column-major
            Zk = np.tril(Zk) + np.tril(Zk, -1).T
            z[off[k]:off[k + 1]] = Zk.ravel()
            p += d * d
    return IPMResult(st, x, y, z, int(sol.get("iterations", 0) or 0), np.nan, np.nan, np.nan)


BACKENDS = {"reference": _reference, "cvxopt": _cvxopt}


def backend_name(name: str | None = None) -> str:
    name = name or os.environ.get(ENV_VAR, "reference")
    name = name.strip().lower()
    if name not in BACKENDS:
        raise ValidationError(f"unknown solver backend {name!r}; available: {', '.join(BACKENDS)}")
    return name


def run_backend(sf: StandardForm, name=None, feas_tol=1e-8, gap_tol=1e-7, max_iters=100, verbose=False):
    return BACKENDS[backend_name(name)](sf, feas_tol, gap_tol, max_iters, verbose)
