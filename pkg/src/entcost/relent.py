"""Barrier-Newton minimization of ``D(rho || tau)`` over PPT-type sets.

The sets are parametrized by real coordinates ``z`` of a few Hermitian
matrices; every PSD condition is an affine matrix function of ``z`` and
enters through ``-log det``.  ``tau`` is affine in ``z`` as well.  Newton
steps use the exact Hessian of ``-tr(rho log tau)``, built from second
divided differences of the logarithm in the eigenbasis of ``tau``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .conic.expressions import hermitian_basis
from .qcore import ValidationError, partial_transpose

LN2 = math.log(2.0)


def log_divided_differences(lam, rel=1e-9):
    """First and second divided differences of ``log`` at the points ``lam``."""
    lam = np.asarray(lam, dtype=float)
    scale = max(np.max(lam), 1e-300)
    tol = rel * scale
    li, lj = lam[:, None], lam[None, :]
    diff = li - lj
    close = np.abs(diff) <= tol
    with np.errstate(divide="ignore", invalid="ignore"):
        f1 = np.where(close, 2.0 / (li + lj), (np.log(li) - np.log(lj)) / np.where(close, 1.0, diff))
    a = lam[:, None, None]
    b = lam[None, :, None]
    c = lam[None, None, :]
    f1_ab = f1[:, :, None]
    f1_bc = f1[None, :, :]
    f1_ac = f1[:, None, :]
    f1_cb = np.transpose(f1, (1, 0))[None, :, :].transpose(0, 2, 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        # f2(a,b,c) = (f1(a,b) - f1(b,c)) / (a - c) when a != c
        ac = a - c
        ab = a - b
        first = (f1_ab - f1_bc) / np.where(np.abs(ac) > tol, ac, 1.0)
        # a == c, b != a: f2(a,b,c) = f2(a,c,b) = (f1(a,c) - f1(c,b)) / (a - b)
        second = (f1_ac - f1_cb) / np.where(np.abs(ab) > tol, ab, 1.0)
    allsame = -0.5 / (((a + b + c) / 3.0) ** 2)
    f2 = np.where(np.abs(ac) > tol, first, np.where(np.abs(ab) > tol, second, allsame))
    return f1, f2


@dataclass
class Affine:
    """Hermitian-matrix valued affine map ``z -> const + sum_a z_a basis[a]``."""

    basis: np.ndarray     # (nz, d, d) complex
    const: np.ndarray     # (d, d) complex

    def __call__(self, z):
        return self.const + np.tensordot(z, self.basis, axes=1)


def _herm_basis(d):
    B = hermitian_basis(d).toarray()              # (d*d, d*d): vec <- coords
    return B.T.reshape(d * d, d, d)


def _embed(basis_block, nz, offset):
    out = np.zeros((nz,) + basis_block.shape[1:], dtype=complex)
    out[offset:offset + basis_block.shape[0]] = basis_block
    return out


def _pt(basis, dims):
    return np.array([partial_transpose(b, dims, 1) for b in basis])


class SetModel:
    """Barrier description of PPT, PPT' or PPT_2 on ``A (x) B``."""

    def __init__(self, kind: str, dims):
        dims = tuple(int(x) for x in dims)
        d = dims[0] * dims[1]
        E = _herm_basis(d)
        m = d * d
        eye = np.eye(d, dtype=complex)
        zero = np.zeros((d, d), dtype=complex)
        self.kind = kind
        self.eq = None
        self.scalar = []        # (a, c): barrier -log(c + a @ z)
        if kind == "PPT":
            nz = m
            tau = Affine(E, zero)
            self.barriers = [tau, Affine(_pt(E, dims), zero)]
            trace_row = np.array([np.trace(b).real for b in E])
            self.eq = (trace_row[None, :], np.array([1.0]))
            z0 = np.linalg.lstsq(E.reshape(m, -1).T, (eye / d).reshape(-1), rcond=None)[0].real
        elif kind in ("PPT'", "PPT1", "Rains"):
            nz = 2 * m                                  # M, N
            BM, BN = _embed(E, nz, 0), _embed(E, nz, m)
            tau = Affine(_pt(BM - BN, dims), zero)
            self.barriers = [tau, Affine(BM, zero), Affine(BN, zero)]
            tr = np.array([np.trace(b).real for b in (BM + BN)])
            self.scalar = [(-tr, 1.0)]
            z0 = np.concatenate([_coords(eye / (2 * d)), _coords(eye / (4 * d))])
        elif kind in ("PPT_2", "PPT2"):
            nz = 3 * m                                  # tau, M, N
            BT, BM, BN = _embed(E, nz, 0), _embed(E, nz, m), _embed(E, nz, 2 * m)
            tau = Affine(BT, zero)
            omega = _pt(BM - BN, dims)
            tpt = _pt(BT, dims)
            self.barriers = [tau, Affine(omega - tpt, zero), Affine(omega + tpt, zero),
                             Affine(BM, zero), Affine(BN, zero)]
            tr = np.array([np.trace(b).real for b in (BM + BN)])
            self.scalar = [(-tr, 1.0)]
            z0 = np.concatenate([_coords(eye / (8 * d)), _coords(eye / (2 * d)), _coords(eye / (4 * d))])
        else:
            raise ValidationError(f"unknown set {kind!r}")
        self.tau = tau
        self.nz = nz
        self.z0 = z0
        self.nu = sum(b.const.shape[0] for b in self.barriers) + len(self.scalar)

    def barrier(self, z, need_hess=True):
        """Value, gradient and Hessian of the barrier; ``None`` if infeasible."""
        val = 0.0
        g = np.zeros(self.nz)
        H = np.zeros((self.nz, self.nz)) if need_hess else None
        for aff in self.barriers:
            X = aff(z)
            X = (X + X.conj().T) / 2
            try:
                L = np.linalg.cholesky(X)
            except np.linalg.LinAlgError:
                return None
            val -= 2 * np.sum(np.log(np.diag(L).real))
            Li = np.linalg.inv(L)
            C = Li @ aff.basis @ Li.conj().T        # (nz, d, d)
            g -= np.einsum("aii->a", C).real
            if need_hess:
                Cm = C.reshape(self.nz, -1)
                H += (Cm @ Cm.conj().T).real
        for a, c in self.scalar:
            s = c + a @ z
            if s <= 0:
                return None
            val -= math.log(s)
            g -= a / s
            if need_hess:
                H += np.outer(a, a) / s ** 2
        return val, g, H


def _coords(X):
    d = X.shape[0]
    from .conic.expressions import hermitian_coords
    return (hermitian_coords(d) @ X.reshape(-1)).real


def objective_terms(rho, tau, basis, floor=1e-300, need_hess=True):
    """Value, gradient and Hessian in ``z`` of ``-tr(rho log2 tau)``."""
    lam, U = np.linalg.eigh(tau)
    if lam[0] <= 0:
        return None
    lam = np.clip(lam, floor, None)
    f1, f2 = log_divided_differences(lam)
    Rt = U.conj().T @ rho @ U
    val = -float(np.sum(np.diag(Rt).real * np.log(lam))) / LN2
    G = -(U @ (f1 * Rt) @ U.conj().T) / LN2       # gradient as a matrix
    grad = np.einsum("ij,aji->a", G, basis).real
    H = None
    if need_hess:
        Bt = np.einsum("ji,ajk,kl->ail", U.conj(), basis, U)   # U^dag B_a U
        T = f2 * Rt.T[:, None, :]                               # T[i,k,j] = Rt[j,i] f2[i,k,j]
        # D2[a,b] = -(1/ln2) sum_ikj T_ikj (Bt_a[i,k] Bt_b[k,j] + Bt_b[i,k] Bt_a[k,j])
        P = np.einsum("ikj,aik->akj", T, Bt)
        D2 = np.einsum("akj,bkj->ab", P, Bt)
        H = -(D2 + D2.T).real / LN2
        H = (H + H.T) / 2
    return val, grad, H, G


def barrier_minimize(rho, model: SetModel, gap_target=1e-7, mu=8.0, t0=1.0,
                     newton_tol=1e-10, max_newton=400):
    """Central-path minimization of ``-tr(rho log2 tau)`` over ``model``.

    Returns ``(tau, z, t, newton_steps)``; the barrier duality gap at the
    end is ``model.nu / t``.
    """
    rho = np.asarray(rho, dtype=complex)
    z = model.z0.copy()
    basis = model.tau.basis
    t = t0
    steps = 0
    Eq = model.eq

    def phi(zz, need_hess):
        b = model.barrier(zz, need_hess)
        if b is None:
            return None
        o = objective_terms(rho, model.tau(zz), basis, need_hess=need_hess)
        if o is None:
            return None
        return b, o

    while True:
        for _ in range(60):
            res = phi(z, True)
            (bv, bg, bH), (ov, og, oH, _) = res
            g = t * og + bg
            H = t * oH + bH
            if Eq is not None:
                A = Eq[0]
                K = np.block([[H, A.T], [A, np.zeros((A.shape[0], A.shape[0]))]])
                sol = np.linalg.solve(K, np.concatenate([-g, np.zeros(A.shape[0])]))
                dz = sol[: model.nz]
            else:
                try:
                    c = np.linalg.cholesky(H)
                    dz = -np.linalg.solve(c.T, np.linalg.solve(c, g))
                except np.linalg.LinAlgError:
                    dz = -np.linalg.lstsq(H, g, rcond=None)[0]
            dec = float(-g @ dz)
            steps += 1
            if dec / 2 <= newton_tol or steps >= max_newton:
                break
            f0 = t * ov + bv
            s = 1.0
            while s > 1e-14:
                r = phi(z + s * dz, False)
                if r is not None:
                    f1 = t * r[1][0] + r[0][0]
                    if f1 <= f0 - 0.25 * s * dec:
                        break
                s *= 0.5
            z = z + s * dz
            if s <= 1e-14:
                break
        if model.nu / t <= gap_target or steps >= max_newton:
            break
        t *= mu
    return model.tau(z), z, t, steps
