"""Reference primal-dual interior-point method for the real standard form.

Infeasible-start path following with the HKM search direction and Mehrotra
predictor-corrector steps.  Only numpy/scipy are used.  The Schur complement
``M_ij = tr(A_i X A_j Z^-1)`` is formed block by block from the sparse rows
of ``A``: for each row ``i`` the product ``Z^-1 A_i X`` is a thin matrix
product, and row ``j`` then only reads the entries it touches.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .lowering import StandardForm

log = logging.getLogger(__name__)


@dataclass
class IPMResult:
    status: str
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    iterations: int
    pinf: float
    dinf: float
    gap: float


class _BlockRows:
    """Entries of ``A`` restricted to one symmetric block, grouped by row."""

    def __init__(self, A: sp.csc_matrix, offset: int, n: int):
        sub = A[:, offset:offset + n * n].tocoo()
        order = np.argsort(sub.row, kind="stable")
        self.row = sub.row[order]
        self.r, self.s = np.divmod(sub.col[order], n)
        self.v = sub.data[order]
        self.rows, starts = np.unique(self.row, return_index=True)
        self.starts = np.append(starts, self.row.size)
        self.n = n
        # small blocks touched by many rows are cheaper as one dense product
        nr, nnz = self.rows.size, self.row.size
        sparse_cost = nr * (2e-5 + 2e-8 * nnz)
        dense_cost = 1e-10 * (nr * n ** 4 + nr * nr * n * n)
        self.dense = None
        if dense_cost < sparse_cost:
            self.dense = sub.tocsr()[self.rows].toarray()
            # column (r, s) pairs with row-major index (s, r) of kron(X, Z^-1)
            self.perm = np.arange(n * n).reshape(n, n).T.ravel()


def _schur_block(M, br: _BlockRows, X, Zi):
    if br.row.size == 0:
        return
    if br.dense is not None:
        # M_ij = tr(A_j Z^-1 A_i X) = vec(A_j)^T kron(X, Z^-1) P vec(A_i)
        K = np.kron(X, Zi)[:, br.perm]
        Ad = br.dense
        M[np.ix_(br.rows, br.rows)] += Ad @ K.T @ Ad.T
        return
    m = M.shape[0]
    for k, i in enumerate(br.rows):
        a, b = br.starts[k], br.starts[k + 1]
        r, s, v = br.r[a:b], br.s[a:b], br.v[a:b]
        G = (Zi[:, r] * v) @ X[s, :]           # Z^-1 A_i X
        w = br.v * G[br.s, br.r]
        M[i] += np.bincount(br.row, weights=w, minlength=m)


def _max_step(X, dX):
    """Largest alpha with X + alpha dX >= 0 (X positive definite)."""
    try:
        L = np.linalg.cholesky(X)
    except np.linalg.LinAlgError:
        return 0.0
    W = sla.solve_triangular(L, dX, lower=True)
    W = sla.solve_triangular(L, W.T, lower=True)
    lam = np.linalg.eigvalsh((W + W.T) / 2)[0]
    return np.inf if lam >= 0 else -1.0 / lam


def _max_step_lp(x, dx):
    neg = dx < 0
    return np.min(-x[neg] / dx[neg]) if np.any(neg) else np.inf


def _sym(a):
    return (a + a.T) / 2


def _inv_pd(Z):
    L = np.linalg.cholesky(Z)
    Li = sla.solve_triangular(L, np.eye(Z.shape[0]), lower=True)
    return Li.T @ Li


def solve_standard(sf: StandardForm, feas_tol: float = 1e-8, gap_tol: float = 1e-7,
                   max_iters: int = 100, verbose: bool = False) -> IPMResult:
    A0 = sp.csr_matrix(sf.A)
    m, N = A0.shape
    nl, dims, nf = sf.n_lp, list(sf.sdp_dims), sf.n_free
    off = sf.sdp_offsets

    if sf.infeasible_rows:
        z = np.zeros(N)
        return IPMResult("infeasible", np.zeros(N), np.zeros(m), z, 0, np.inf, np.inf, np.inf)

    # scaling: unit row norms, then normalize b and c
    rn = np.sqrt(np.asarray(A0.multiply(A0).sum(axis=1)).ravel())
    rn[rn == 0] = 1.0
    Dr = 1.0 / rn
    A = sp.diags(Dr) @ A0
    A = sp.csr_matrix(A)
    b = sf.b * Dr
    beta = max(1.0, np.linalg.norm(b))
    gamma = max(1.0, np.linalg.norm(sf.c))
    b = b / beta
    c = sf.c / gamma

    Ac = A.tocsc()
    AT = A.T.tocsr()
    Al = Ac[:, :nl]
    Af = Ac[:, off[-1]:].toarray() if nf else np.zeros((m, 0))
    brows = [_BlockRows(Ac, off[k], d) for k, d in enumerate(dims)]
    nu = nl + sum(dims)

    def split(v):
        return v[:nl], [v[off[k]:off[k + 1]].reshape(d, d) for k, d in enumerate(dims)], v[off[-1]:]

    def join(l, bl, f):
        return np.concatenate([l] + [B.ravel() for B in bl] + [f])

    # starting point
    xl, zl = np.ones(nl), np.ones(nl)
    Xs = [np.eye(d) for d in dims]
    Zs = [np.eye(d) for d in dims]
    xf = np.zeros(nf)
    y = np.zeros(m)

    status = "inaccurate"
    best = None
    best_it = 0
    it = 0
    pinf = dinf = relgap = np.inf
    bnorm, cnorm = 1 + np.linalg.norm(b), 1 + np.linalg.norm(c)
    for it in range(max_iters + 1):
        x = join(xl, Xs, xf)
        z = join(zl, Zs, np.zeros(nf))
        rp = b - A @ x
        rd = c - AT @ y - z
        pobj, dobj = c @ x, b @ y
        mu = (xl @ zl + sum(np.sum(X * Z) for X, Z in zip(Xs, Zs))) / max(nu, 1)
        pinf = np.linalg.norm(rp) / bnorm
        dinf = np.linalg.norm(rd) / cnorm
        # gap measured in the original units, matching the certificate check in solve()
        og = beta * gamma
        relgap = og * abs(pobj - dobj) / max(1.0, og * abs(pobj), og * abs(dobj))
        if verbose:
            log.info("it %3d pobj %+.9e dobj %+.9e pinf %.1e dinf %.1e gap %.1e mu %.1e",
                     it, pobj, dobj, pinf, dinf, relgap, mu)
        score = max(pinf / feas_tol, dinf / feas_tol, relgap / gap_tol)
        if best is None or score < 0.7 * best[0]:
            best_it = it
        if best is None or score < best[0]:
            best = (score, x.copy(), y.copy(), z.copy(), pinf, dinf, relgap)
        if pinf <= feas_tol * 0.5 and dinf <= feas_tol * 0.5 and relgap <= gap_tol * 0.1:
            status = "optimal"
            break

        # infeasibility certificates
        if dobj > 0 and np.linalg.norm(AT @ y + z) / dobj < feas_tol:
            status = "infeasible"
            break
        if pobj < 0 and np.linalg.norm(A @ x) / -pobj < feas_tol:
            status = "unbounded"
            break
        if it == max_iters:
            break

        # stop when the best iterate has not improved for a while
        if it - best_it > 8:
            break

        # Schur complement
        try:
            Zis = [_inv_pd(Z) for Z in Zs]
        except np.linalg.LinAlgError:
            break
        M = np.zeros((m, m))
        for br, X, Zi in zip(brows, Xs, Zis):
            _schur_block(M, br, X, Zi)
        if nl:
            M += (Al @ sp.diags(xl / zl) @ Al.T).toarray()
        M = (M + M.T) / 2
        reg = 1e-15 * max(1.0, np.max(np.abs(np.diag(M)), initial=1.0))
        for _ in range(6):
            try:
                fac = sla.cho_factor(M + reg * np.eye(m), lower=True, check_finite=False)
                break
            except np.linalg.LinAlgError:
                reg *= 100
        else:
            break
        if nf:
            MiAf = sla.cho_solve(fac, Af)
            S = Af.T @ MiAf
            S = (S + S.T) / 2

        rdl, rdb, rdf = split(rd)

        def direction(rcl, Rcs):
            h = rp.copy()
            if nl:
                h -= Al @ (rcl / zl) - Al @ (xl * rdl / zl)
            for k, (X, Zi, Rc, Rd) in enumerate(zip(Xs, Zis, Rcs, rdb)):
                G = Rc @ Zi - X @ Rd @ Zi
                h -= Ac[:, off[k]:off[k + 1]] @ G.ravel()
            if nf:
                Mih = sla.cho_solve(fac, h)
                dxf = np.linalg.lstsq(S, Af.T @ Mih - rdf, rcond=None)[0]
                dy = Mih - MiAf @ dxf
            else:
                dxf = np.zeros(0)
                dy = sla.cho_solve(fac, h)
            dz = rd - AT @ dy
            dzl, dZs, _ = split(dz)
            dxl = (rcl - xl * dzl) / zl if nl else np.zeros(0)
            dXs = [_sym((Rc - X @ dZ) @ Zi) for X, Zi, Rc, dZ in zip(Xs, Zis, Rcs, dZs)]
            return dxl, dXs, dxf, dy, dzl, dZs

        def steps(dxl, dXs, dzl, dZs):
            ap = min([_max_step_lp(xl, dxl)] + [_max_step(X, dX) for X, dX in zip(Xs, dXs)])
            ad = min([_max_step_lp(zl, dzl)] + [_max_step(Z, dZ) for Z, dZ in zip(Zs, dZs)])
            return ap, ad

        # predictor
        dxl, dXs, dxf, dy, dzl, dZs = direction(-xl * zl, [-X @ Z for X, Z in zip(Xs, Zs)])
        ap, ad = steps(dxl, dXs, dzl, dZs)
        ap, ad = min(1.0, ap), min(1.0, ad)
        mu_aff = ((xl + ap * dxl) @ (zl + ad * dzl)
                  + sum(np.sum((X + ap * dX) * (Z + ad * dZ)) for X, dX, Z, dZ in zip(Xs, dXs, Zs, dZs))) / max(nu, 1)
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0

        # corrector
        rcl = sigma * mu - xl * zl - dxl * dzl
        Rcs = [sigma * mu * np.eye(X.shape[0]) - X @ Z - dX @ dZ for X, Z, dX, dZ in zip(Xs, Zs, dXs, dZs)]
        dxl, dXs, dxf, dy, dzl, dZs = direction(rcl, Rcs)
        ap, ad = steps(dxl, dXs, dzl, dZs)
        tau = 0.9 + 0.09 * min(1.0, ap, ad)
        ap, ad = min(1.0, tau * ap), min(1.0, tau * ad)
        if ap < 1e-12 and ad < 1e-12:
            break

        xl = xl + ap * dxl
        Xs = [_sym(X + ap * dX) for X, dX in zip(Xs, dXs)]
        xf = xf + ap * dxf
        y = y + ad * dy
        zl = zl + ad * dzl
        Zs = [_sym(Z + ad * dZ) for Z, dZ in zip(Zs, dZs)]

    if status in ("optimal", "infeasible", "unbounded"):
        x_s, y_s, z_s = join(xl, Xs, xf), y, join(zl, Zs, np.zeros(nf))
    else:
        _, x_s, y_s, z_s, pinf, dinf, relgap = best
        if max(pinf, dinf) <= feas_tol * 1e3 and relgap <= gap_tol * 1e3 and best[0] <= 1.0:
            status = "optimal"

    # unscale
    x_out = beta * x_s
    y_out = gamma * Dr * y_s
    z_out = gamma * z_s
    return IPMResult(status, x_out, y_out, z_out, it, pinf, dinf, relgap)
