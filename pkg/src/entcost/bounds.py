"""Static lower bounds on entanglement cost and the PPT_k substate sets.

All values are in bits.  The fidelity-type bounds are ``-2 log2`` of a
root-fidelity SDP optimum.  ``rho`` is always a :class:`BipartiteState`; the
partial transpose acts on the second factor.

PPT_k is the set of ``sigma >= 0`` admitting a chain ``omega_1 = sigma``,
``-omega_{i+1} <= omega_i^{T_B} <= omega_{i+1}`` and
``||omega_k^{T_B}||_1 <= 1``; ``k = 1`` is the Rains set.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize_scalar

from . import conic, relent
from .conic import ConicProgram, solve
from .conic.backends import run_backend
from .conic.lowering import lower, objective_vector, recover_variables
from .qcore import (EIG_CUTOFF, BipartiteState, SolverError, ValidationError, encode_matrix,
                    is_ppt, negativity_spectrum, partial_transpose, root_fidelity)

log = logging.getLogger(__name__)

SUPPORT_CUTOFF_ETA = 1e-8


@dataclass
class BoundResult:
    name: str
    value_bits: float
    primal_value: float
    dual_value: float
    status: str
    root_fidelity: float | None = None
    witnesses: dict = field(default_factory=dict, repr=False)
    metadata: dict = field(default_factory=dict)

    @property
    def gap(self) -> float:
        return abs(self.primal_value - self.dual_value)

    @property
    def ok(self) -> bool:
        return self.status == conic.OPTIMAL

    def to_dict(self, witnesses: bool = False) -> dict:
        out = {
            "bound": self.name,
            "value_bits": self.value_bits,
            "primal_value": self.primal_value,
            "dual_value": self.dual_value,
            "gap": self.gap,
            "status": self.status,
            "root_fidelity": self.root_fidelity,
            "metadata": self.metadata,
        }
        if witnesses:
            out["witnesses"] = {k: encode_matrix(v) for k, v in self.witnesses.items()
                                if isinstance(v, np.ndarray) and v.ndim == 2}
        return out


@dataclass(frozen=True)
class FWParams:
    max_iters: int = 2000
    gap_tol: float = 1e-4
    eig_floor: float = 1e-12

    def __post_init__(self):
        if self.max_iters <= 0 or self.gap_tol <= 0 or self.eig_floor <= 0:
            raise ValidationError("FWParams fields must be positive")


def _state(rho) -> BipartiteState:
    if not isinstance(rho, BipartiteState):
        raise ValidationError("expected a BipartiteState")
    return rho


def _bits_from_root_fidelity(f: float) -> float:
    return -2.0 * math.log2(f) if f > 0 else math.inf


def _clamp(raw: float) -> float:
    return max(raw, 0.0)


def _support(m, rel_cutoff=EIG_CUTOFF):
    w, v = np.linalg.eigh(np.asarray(m))
    keep = w > rel_cutoff * max(np.max(np.abs(w)), 1e-300)
    return w[keep], v[:, keep]


def _combine_status(*statuses):
    for s in (conic.INFEASIBLE, conic.UNBOUNDED, conic.INACCURATE):
        if s in statuses:
            return s
    return conic.OPTIMAL


def _require(res, what):
    if res.status in (conic.INFEASIBLE, conic.UNBOUNDED):
        raise SolverError(f"{what}: solver reported {res.status}", res.status)


# ---------------------------------------------------------------------------
# Program builders
# ---------------------------------------------------------------------------


def _fidelity_block(prog: ConicProgram, rho: np.ndarray, name="W"):
    """Block ``[[rho, X], [X^dag, sigma]] >= 0`` restricted to the support of ``rho``.

    ``range(X)`` lies in ``supp(rho)`` whenever the block is PSD, so writing
    ``X = V Y`` with ``V`` an isometry onto the support is exact and keeps
    the program strictly feasible.  Returns ``(W, sigma, objective, V)``
    with ``objective = Re tr X``.
    """
    lam, V = _support(rho)
    r, d = lam.size, rho.shape[0]
    W = prog.variable(name, r + d)
    prog.psd_block(W, f"{name}_psd")
    prog.equality(W[:r, :r] - np.diag(lam), f"{name}_rho")
    sigma = W[r:, r:]
    objective = (W[:r, r:] @ V).trace().real
    return W, sigma, objective, V


def _ppt_chain(prog: ConicProgram, sigma, dims, k: int, prefix="omega", bound=1.0):
    """Constrain ``sigma`` to PPT_k (``bound`` may be a scalar expression).

    Returns the list ``[omega_1, ..., omega_k]`` of expressions.
    """
    if k < 1:
        raise ValidationError("k must be >= 1")
    d = int(np.prod(dims))
    M = prog.variable(f"{prefix}_M", d)
    N = prog.variable(f"{prefix}_N", d)
    prog.psd_block(M, f"{prefix}_M_psd")
    prog.psd_block(N, f"{prefix}_N_psd")
    tr = (M + N).trace()
    if isinstance(bound, conic.Expr):
        prog.trace_bound(tr - bound, 0.0, f"{prefix}_trace")
    else:
        prog.trace_bound(tr, bound, f"{prefix}_trace")
    if k == 1:
        prog.equality(sigma.ptranspose(dims) - (M - N), f"{prefix}_rains")
        return [sigma]
    omegas = [sigma]
    for i in range(2, k):
        # omega_i dominates +-omega_{i-1}^{T_B}, so it is PSD; declaring it keeps the program free-variable free
        om = prog.variable(f"{prefix}_{i}", d)
        prog.psd_block(om, f"{prefix}_{i}_psd")
        omegas.append(om)
    omegas.append((M - N).ptranspose(dims))
    for i in range(k - 1):
        low = omegas[i].ptranspose(dims)
        prog.psd_block(omegas[i + 1] - low, f"{prefix}_link{i + 1}_lo")
        prog.psd_block(omegas[i + 1] + low, f"{prefix}_link{i + 1}_hi")
    return omegas


def _set_program(kind: str, dims, name="set"):
    """Program with a single PSD variable ``tau`` constrained to a named set."""
    d = int(np.prod(dims))
    prog = ConicProgram(name)
    tau = prog.variable("tau", d)
    prog.psd_block(tau, "tau_psd")
    if kind == "PPT":
        prog.psd_block(tau.ptranspose(dims), "tau_ppt")
        prog.equality(tau.trace() - 1.0, "tau_trace")
    elif kind in ("PPT'", "PPT1", "Rains"):
        _ppt_chain(prog, tau, dims, 1, "rains")
    elif kind in ("PPT_2", "PPT2"):
        _ppt_chain(prog, tau, dims, 2, "chain")
    else:
        raise ValidationError(f"unknown set {kind!r}; use 'PPT', \"PPT'\" or 'PPT_2'")
    return prog, tau


# ---------------------------------------------------------------------------
# Fidelity and the binegativity family
# ---------------------------------------------------------------------------


def fidelity_sdp(rho, sigma, **solve_kw) -> float:
    """Root fidelity ``max Re tr X`` over ``[[rho, X], [X^dag, sigma]] >= 0``."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    lr, Vr = _support(rho)
    ls, Vs = _support(sigma)
    if lr.size == 0 or ls.size == 0:
        return 0.0
    prog = ConicProgram("fidelity")
    r = lr.size
    W = prog.variable("W", r + ls.size)
    prog.psd_block(W, "W_psd")
    prog.equality(W[:r, :r] - np.diag(lr), "rho")
    prog.equality(W[r:, r:] - np.diag(ls), "sigma")
    prog.maximize((W[:r, r:] @ (Vs.conj().T @ Vr)).trace().real)
    res = solve(prog, **solve_kw)
    _require(res, "fidelity_sdp")
    if res.status != conic.OPTIMAL:
        raise SolverError(f"fidelity_sdp: solver reported {res.status}", res.status)
    return float(res.primal_value)


def _nb_primal(rho: BipartiteState, k: int, **solve_kw):
    prog = ConicProgram(f"E_NB{k}_primal")
    W, sigma, objective, V = _fidelity_block(prog, rho.matrix)
    omegas = _ppt_chain(prog, sigma, rho.dims, k)
    prog.maximize(objective)
    res = solve(prog, **solve_kw)
    return prog, res, (W, sigma, omegas, V)


def e_nb_k_half(rho, k: int = 2, **solve_kw) -> BoundResult:
    """``-log2`` of the maximal fidelity between ``rho`` and PPT_k."""
    rho = _state(rho)
    if k < 1:
        raise ValidationError("k must be >= 1")
    prog, res, (W, sigma, omegas, V) = _nb_primal(rho, k, **solve_kw)
    _require(res, f"E_NB,{k}")
    vals = {v: res.witnesses[v.name] for v in prog.variables}
    f = min(res.primal_value, 1.0)
    raw = _bits_from_root_fidelity(f)
    r = V.shape[1]
    wit = {
        "sigma": sigma.value(vals),
        "X": V @ W.value(vals)[:r, r:],
        **{f"omega_{i + 1}": om.value(vals) for i, om in enumerate(omegas)},
    }
    primal = res.primal_value
    # rho^{T_B} >= 0 makes sigma = rho (omega_i = rho^{T_B}) feasible: fidelity is exactly 1
    certified = bool(negativity_spectrum(rho.matrix, rho.layout)[0] >= 0.0)
    if certified:
        primal, raw = 1.0, 0.0
        wit["sigma"] = rho.matrix.copy()
    return BoundResult(f"e_nb{k}_half", _clamp(raw), primal, res.dual_value, res.status,
                       root_fidelity=primal, witnesses=wit,
                       metadata={"k": k, "raw_value": raw, "residuals": res.residuals,
                                 "support_rank": r, "backend": res.backend, "ppt_certificate": certified})


def _dual_block(prog: ConicProgram, rho: np.ndarray, name="QR"):
    """Block ``[[Q, -I], [-I, R]] >= 0`` restricted to the support of ``rho``.

    With ``V`` an isometry onto ``supp(rho)`` the block becomes
    ``[[Q_r, -V^dag], [-V, R]]`` and ``tr(Q rho) = tr(Q_r Lambda)``.  Returns
    ``(Q_r, R, value, lam, V)``.
    """
    lam, V = _support(rho)
    r, d = lam.size, rho.shape[0]
    Wd = prog.variable(name, r + d)
    prog.psd_block(Wd, f"{name}_psd")
    prog.equality(Wd[:r, r:] + V.conj().T, f"{name}_offdiag")
    Qr, R = Wd[:r, :r], Wd[r:, r:]
    value = (Qr @ np.diag(lam)).trace().real
    return Qr, R, value, lam, V


def _complete_q(Qr, R, V, eps=1e-9):
    """Full-space ``Q`` with ``[[Q, -I], [-I, R]] >= 0`` from the support-restricted solution.

    ``Q = V (Q_r + eps I) V^dag + c (I - V V^dag)`` with ``c`` the smallest
    value making ``Q - R^{-1}`` PSD.  ``tr(Q rho)`` grows by ``eps``.
    """
    d, r = V.shape
    R = (R + R.conj().T) / 2
    w, U = np.linalg.eigh(R)
    if w[0] <= 0:
        return V @ Qr @ V.conj().T
    Rinv = (U / w) @ U.conj().T
    if r == d:
        return V @ Qr @ V.conj().T
    K = np.linalg.svd(np.eye(d) - V @ V.conj().T)[0][:, : d - r]
    for _ in range(8):
        A = Qr + eps * np.eye(r) - V.conj().T @ Rinv @ V
        A = (A + A.conj().T) / 2
        if np.linalg.eigvalsh(A)[0] > 0:
            break
        eps *= 10
    Bm = -V.conj().T @ Rinv @ K
    Dm = -K.conj().T @ Rinv @ K
    S = Bm.conj().T @ np.linalg.solve(A, Bm) - Dm
    c = max(float(np.linalg.eigvalsh((S + S.conj().T) / 2)[-1]), 0.0) * (1 + 1e-9) + 1e-12
    return V @ (Qr + eps * np.eye(r)) @ V.conj().T + c * (K @ K.conj().T)


def _nb2_dual_program(rho: BipartiteState):
    d = rho.matrix.shape[0]
    dims = rho.dims
    prog = ConicProgram("E_NB2_dual")
    Qr, R, val, lam, Vs = _dual_block(prog, rho.matrix)
    U = prog.variable("U", d)
    V = prog.variable("V", d)
    prog.psd_block(U, "U_psd")
    prog.psd_block(V, "V_psd")
    prog.psd_block(U.ptranspose(dims) - V.ptranspose(dims) - R, "UV_R")
    upv = (U + V).ptranspose(dims)
    prog.psd_block(val.times(np.eye(d)) - upv, "UV_upper")
    prog.psd_block(val.times(np.eye(d)) + upv, "UV_lower")
    prog.minimize(val)
    return prog, (Qr, R, U, V, Vs)


def e_nb2_half_dual(rho, **solve_kw) -> BoundResult:
    """Dual SDP: ``min tr(Q rho)``; any feasible ``Q`` certifies ``-2 log2 tr(Q rho)``."""
    rho = _state(rho)
    prog, (Qr, R, U, V, Vs) = _nb2_dual_program(rho)
    res = solve(prog, **solve_kw)
    _require(res, "E_NB,2 dual")
    vals = {v: res.witnesses[v.name] for v in prog.variables}
    t = res.primal_value
    raw = _bits_from_root_fidelity(t) if t > 0 else math.inf
    Rv = R.value(vals)
    wit = {"Q": _complete_q(Qr.value(vals), Rv, Vs), "R": Rv, "U": U.value(vals), "V": V.value(vals)}
    return BoundResult("e_nb2_half_dual", _clamp(raw), res.dual_value, res.primal_value, res.status,
                       root_fidelity=t, witnesses=wit,
                       metadata={"raw_value": raw, "residuals": res.residuals, "backend": res.backend})


def e_nb2_half(rho, with_dual: bool = True, **solve_kw) -> BoundResult:
    """Logarithmic fidelity of binegativity ``E_NB,2^{1/2}``.

    The primal SDP gives ``sigma*`` and the root fidelity; with ``with_dual``
    the explicit dual SDP is co-solved for the certificate ``Q*`` and the
    reported ``dual_value`` is its objective ``tr(Q* rho)``.  Otherwise the
    Lagrange dual value of the primal solve is reported.
    """
    res = e_nb_k_half(rho, 2, **solve_kw)
    res.name = "e_nb2_half"
    if with_dual:
        dual = e_nb2_half_dual(rho, **solve_kw)
        res.dual_value = dual.dual_value
        res.witnesses["Q"] = dual.witnesses["Q"]
        res.status = _combine_status(res.status, dual.status)
        res.metadata["dual_residuals"] = dual.metadata["residuals"]
    return res


def ppt_k_norm(sigma, dims, k: int, **solve_kw) -> float:
    """Smallest ``t`` with ``||omega_k^{T_B}||_1 <= t`` over PPT_k chains starting at ``sigma``."""
    sigma = np.asarray(sigma, dtype=complex)
    if k < 1:
        raise ValidationError("k must be >= 1")
    prog = ConicProgram(f"PPT{k}_membership")
    t = prog.variable("t", 1)
    prog.psd_block(t, "t_psd")
    _ppt_chain(prog, conic.as_expr(sigma), dims, k, "chain", bound=t)
    prog.minimize(t.trace())
    res = solve(prog, **solve_kw)
    _require(res, "ppt_k_membership")
    return float(res.primal_value)


def ppt_k_membership(sigma, layout, k: int, tol: float = 1e-6, **solve_kw) -> bool:
    """True iff ``sigma`` lies in PPT_k (within ``tol`` on the trace-norm budget)."""
    dims = getattr(layout, "dims", layout)
    s = np.asarray(sigma, dtype=complex)
    if np.linalg.eigvalsh((s + s.conj().T) / 2)[0] < -1e-10:
        raise ValidationError("sigma must be positive semidefinite")
    return ppt_k_norm(s, dims, k, **solve_kw) <= 1.0 + tol


# ---------------------------------------------------------------------------
# Comparison bounds
# ---------------------------------------------------------------------------


def e_eta(rho, cutoff: float = SUPPORT_CUTOFF_ETA, **solve_kw) -> BoundResult:
    """``-log2 max tr(P sigma)`` over PPT_2, ``P`` the support projector of ``rho``."""
    rho = _state(rho)
    _, V = _support(rho.matrix, cutoff)
    P = V @ V.conj().T
    prog = ConicProgram("E_eta")
    d = P.shape[0]
    sigma = prog.variable("sigma", d)
    prog.psd_block(sigma, "sigma_psd")
    _ppt_chain(prog, sigma, rho.dims, 2)
    prog.maximize((sigma @ P).trace().real)
    res = solve(prog, **solve_kw)
    _require(res, "E_eta")
    val = min(res.primal_value, 1.0)
    raw = -math.log2(val) if val > 0 else math.inf
    return BoundResult("e_eta", _clamp(raw), res.primal_value, res.dual_value, res.status,
                       witnesses={"sigma": res.witnesses["sigma"], "support_projector": P},
                       metadata={"raw_value": raw, "support_cutoff": cutoff, "support_rank": V.shape[1],
                                 "residuals": res.residuals})


def tempered_negativity(rho, cutoff: float = SUPPORT_CUTOFF_ETA, **solve_kw) -> BoundResult:
    """``log2 N_tau`` with ``N_tau = max{tr(A rho): ||A^{T_B}||_inf <= 1, ||A||_inf <= tr(A rho)}``.

    Since ``tr(A rho) <= ||A||_inf`` the second constraint is tight and puts
    ``supp(rho)`` in the top eigenspace of ``A``, so ``A = t P + V Y V^dag``
    with ``P`` the support projector, ``V`` an isometry onto the kernel and
    ``-t I <= Y <= t I``.  The reduced program is strictly feasible, the
    original one is not.
    """
    rho = _state(rho)
    d = rho.matrix.shape[0]
    w, U = np.linalg.eigh(rho.matrix)
    keep = w > cutoff * max(np.max(np.abs(w)), 1e-300)
    P = U[:, keep] @ U[:, keep].conj().T
    V = U[:, ~keep]
    k = V.shape[1]
    prog = ConicProgram("tempered_negativity")
    t = prog.variable("t", 1)
    prog.psd_block(t, "t_nonneg")
    A = t.times(P)
    if k:
        # W = t I - Y keeps every variable inside a cone (no free coordinates)
        W = prog.variable("W", k)
        prog.psd_block(W, "Y_upper")
        prog.psd_block(t.times(2 * np.eye(k)) - W, "Y_lower")
        A = A + V @ (t.times(np.eye(k)) - W) @ V.conj().T
    eye = np.eye(d)
    At = A.ptranspose(rho.dims)
    prog.psd_block(eye - At, "AT_upper")
    prog.psd_block(eye + At, "AT_lower")
    prog.maximize(t.trace().real)
    res = solve(prog, **solve_kw)
    _require(res, "tempered negativity")
    n_tau = res.primal_value
    raw = math.log2(n_tau) if n_tau > 0 else -math.inf
    tv = float(np.real(res.witnesses["t"]).ravel()[0])
    Aw = tv * P
    if k:
        Aw = Aw + V @ (tv * np.eye(k) - res.witnesses["W"]) @ V.conj().T
    return BoundResult("tempered_negativity", _clamp(raw), res.primal_value, res.dual_value, res.status,
                       witnesses={"A": Aw}, metadata={"raw_value": raw, "support_cutoff": cutoff,
                                                      "support_rank": d - k, "residuals": res.residuals})


# ---------------------------------------------------------------------------
# Relative entropy to PPT-type sets (Frank-Wolfe)
# ---------------------------------------------------------------------------


def _logm_h(m, floor):
    w, v = np.linalg.eigh(m)
    return (v * np.log2(np.clip(w, floor, None))) @ v.conj().T


def relative_entropy(rho, tau, floor: float = 1e-12) -> float:
    """``D(rho || tau)`` in bits; ``tau`` eigenvalues are floored at ``floor``."""
    rho = np.asarray(rho)
    w = np.linalg.eigvalsh(rho)
    w = w[w > 1e-300]
    neg_s = float(np.sum(w * np.log2(w)))
    return neg_s - float(np.trace(rho @ _logm_h(np.asarray(tau), floor)).real)


def _cross_grad(rho, tau, floor):
    """Gradient of ``tau -> -tr(rho log2 tau)`` (divided differences of log)."""
    lam, U = np.linalg.eigh(tau)
    lam = np.clip(lam, floor, None)
    li, lj = lam[:, None], lam[None, :]
    diff = li - lj
    same = np.abs(diff) <= 1e-12 * np.maximum(li, lj)
    with np.errstate(divide="ignore", invalid="ignore"):
        gamma = np.where(same, 1.0 / np.maximum(li, lj), (np.log(li) - np.log(lj)) / np.where(same, 1.0, diff))
    R = U.conj().T @ rho @ U
    return -(U @ (gamma * R) @ U.conj().T) / math.log(2)


class _LinearOracle:
    """Repeated linear minimization over a fixed SDP-representable set."""

    def __init__(self, kind, dims, **solve_kw):
        self.prog, self.tau = _set_program(kind, dims, f"LMO_{kind}")
        self.prog.minimize(self.tau.trace())
        self.sf = lower(self.prog)
        self.solve_kw = solve_kw
        self.var = self.tau.source

    def __call__(self, G):
        expr = (self.tau @ G).trace().real
        sf = replace(self.sf, c=objective_vector(self.sf, expr, "min"))
        res = run_backend(sf, self.solve_kw.get("backend"), feas_tol=self.solve_kw.get("feas_tol", 1e-8),
                          gap_tol=self.solve_kw.get("gap_tol", 1e-7))
        if res.status in (conic.INFEASIBLE, conic.UNBOUNDED):
            raise SolverError(f"linear oracle: {res.status}", res.status)
        s = recover_variables(sf, res.x)[self.var]
        return (s + s.conj().T) / 2


def rel_entropy_to_set(rho, set: str = "PPT'", params: FWParams | None = None, method: str = "barrier",
                       **solve_kw) -> BoundResult:
    """Minimize ``D(rho || tau)`` over ``tau`` in PPT, PPT' or PPT_2, with a Frank-Wolfe certificate.

    ``method="barrier"`` first follows the central path of a log-det
    barrier with exact Newton steps, which handles minimizers close to the
    PSD boundary where plain Frank-Wolfe crawls.  The point reached is then
    certified (and if needed polished) by Frank-Wolfe iterations with exact
    line search; each iteration calls the linear oracle, one SDP.
    ``method="fw"`` skips the barrier phase and starts from ``I/d``.

    ``value_bits`` is the objective at the returned ``tau`` and
    ``metadata["fw_gap"]`` the Frank-Wolfe duality gap there, so
    ``dual_value = value_bits - fw_gap`` is a certified lower bound on the
    minimum.  Status is ``optimal`` once the gap is below ``params.gap_tol``.
    """
    rho = _state(rho)
    params = params or FWParams()
    if method not in ("barrier", "fw"):
        raise ValidationError(f"unknown method {method!r}")
    R = rho.matrix
    d = R.shape[0]
    oracle = _LinearOracle(set, rho.dims, **solve_kw)
    floor = params.eig_floor

    def f(t):
        return relative_entropy(R, t, floor)

    newton = 0
    if method == "barrier":
        model = relent.SetModel(set, rho.dims)
        tau, _, _, newton = relent.barrier_minimize(R, model, gap_target=0.01 * params.gap_tol)
        tau = (tau + tau.conj().T) / 2
    else:
        tau = np.eye(d, dtype=complex) / d
    fval = f(tau)
    gap = math.inf
    it = 0
    for it in range(1, params.max_iters + 1):
        G = _cross_grad(R, tau, floor)
        direction = oracle(G) - tau
        gap = float(-np.trace(G @ direction).real)
        if gap <= params.gap_tol:
            break
        ls = minimize_scalar(lambda g: f(tau + g * direction), bounds=(0.0, 1.0), method="bounded",
                             options={"xatol": 1e-12})
        if ls.fun < fval:
            tau = tau + float(ls.x) * direction
            tau = (tau + tau.conj().T) / 2
            fval = f(tau)
    status = conic.OPTIMAL if gap <= params.gap_tol else conic.INACCURATE
    lower_bound = fval - max(gap, 0.0)
    return BoundResult(f"rel_entropy_{set}", _clamp(fval), fval, lower_bound, status,
                       witnesses={"tau": tau},
                       metadata={"set": set, "method": method, "fw_gap": gap, "iterations": it,
                                 "newton_steps": newton, "certified_lower": lower_bound,
                                 "raw_value": fval, "eig_floor": floor})


# ---------------------------------------------------------------------------
# Hash hierarchy relaxation
# ---------------------------------------------------------------------------


def e_hash2_lower(rho, **solve_kw) -> BoundResult:
    """``-2 log2 f_hat`` with ``f_hat`` the relaxed hash-set fidelity SDP."""
    rho = _state(rho)
    dims = rho.dims
    d = rho.matrix.shape[0]
    prog = ConicProgram("hash2_primal")
    W, sigma, objective, V = _fidelity_block(prog, rho.matrix)
    C, D, M, N = (prog.variable(n, d) for n in ("C", "D", "M", "N"))
    for name, X in zip("CDMN", (C, D, M, N)):
        prog.psd_block(X, f"{name}_psd")
    prog.equality(C + D - M.ptranspose(dims) + N.ptranspose(dims), "CD_split")
    prog.trace_bound((M + N).trace(), 1.0, "MN_trace")
    prog.equality(sigma - C.ptranspose(dims) + D.ptranspose(dims), "sigma_slot")
    prog.maximize(objective)
    res = solve(prog, **solve_kw)
    _require(res, "hash bound")
    f = min(res.primal_value, 1.0)
    raw = _bits_from_root_fidelity(f)
    vals = {v: res.witnesses[v.name] for v in prog.variables}
    return BoundResult("e_hash2_lower", _clamp(raw), res.primal_value, res.dual_value, res.status,
                       root_fidelity=res.primal_value,
                       witnesses={"sigma": sigma.value(vals), "C": res.witnesses["C"], "D": res.witnesses["D"]},
                       metadata={"raw_value": raw, "residuals": res.residuals})


def e_hash2_dual(rho, **solve_kw) -> BoundResult:
    """Dual of the hash relaxation: ``min tr(Q rho)`` with the ``S``-sandwich constraints."""
    rho = _state(rho)
    dims = rho.dims
    d = rho.matrix.shape[0]
    prog = ConicProgram("hash2_dual")
    Qr, R, t, lam, Vs = _dual_block(prog, rho.matrix)
    S = prog.variable("S", d)
    prog.psd_block(S, "S_psd")      # implied by -S <= R^{T_B} <= S
    RT = R.ptranspose(dims)
    prog.psd_block(S - RT, "S_upper")
    prog.psd_block(S + RT, "S_lower")
    ST = S.ptranspose(dims)
    prog.psd_block(t.times(np.eye(d)) - ST, "ST_upper")
    prog.psd_block(t.times(np.eye(d)) + ST, "ST_lower")
    prog.minimize(t)
    res = solve(prog, **solve_kw)
    _require(res, "hash dual")
    tv = res.primal_value
    raw = _bits_from_root_fidelity(tv) if tv > 0 else math.inf
    vals = {v: res.witnesses[v.name] for v in prog.variables}
    return BoundResult("e_hash2_dual", _clamp(raw), res.dual_value, tv, res.status, root_fidelity=tv,
                       witnesses={"Q": _complete_q(Qr.value(vals), R.value(vals), Vs), "R": R.value(vals),
                                  "S": res.witnesses["S"]},
                       metadata={"raw_value": raw, "residuals": res.residuals})


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


def concurrence(rho) -> float:
    """Wootters concurrence of a two-qubit state."""
    r = np.asarray(rho)
    if r.shape != (4, 4):
        raise ValidationError("concurrence needs a two-qubit state")
    yy = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])
    rt = yy @ r.conj() @ yy
    ev = np.sort(np.sqrt(np.clip(np.linalg.eigvals(r @ rt).real, 0, None)))[::-1]
    return float(max(0.0, ev[0] - ev[1] - ev[2] - ev[3]))


def entanglement_of_formation_2q(rho) -> float:
    """Single-copy entanglement of formation of a two-qubit state (bits)."""
    c = concurrence(rho)
    x = (1 + math.sqrt(max(0.0, 1 - c * c))) / 2
    if x >= 1.0:
        return 0.0
    return float(-x * math.log2(x) - (1 - x) * math.log2(1 - x))


def log_negativity(rho) -> float:
    rho = _state(rho)
    w = np.linalg.eigvalsh(partial_transpose(rho.matrix, rho.dims, 1))
    return float(math.log2(np.sum(np.abs(w))))


STATE_BOUNDS = {
    "e_nb2_half": e_nb2_half,
    "e_nb2_half_dual": e_nb2_half_dual,
    "e_nb1_half": lambda rho, **kw: e_nb_k_half(rho, 1, **kw),
    "e_nb3_half": lambda rho, **kw: e_nb_k_half(rho, 3, **kw),
    "e_eta": e_eta,
    "tempered_negativity": tempered_negativity,
    "rains": lambda rho, **kw: rel_entropy_to_set(rho, "PPT'", **kw),
    "rel_entropy_ppt": lambda rho, **kw: rel_entropy_to_set(rho, "PPT", **kw),
    "e_hash2_lower": e_hash2_lower,
    "e_hash2_dual": e_hash2_dual,
}

__all__ = [
    "BoundResult", "FWParams", "fidelity_sdp", "e_nb2_half", "e_nb2_half_dual", "e_nb_k_half",
    "ppt_k_membership", "ppt_k_norm", "e_eta", "tempered_negativity", "rel_entropy_to_set",
    "relative_entropy", "e_hash2_lower", "e_hash2_dual", "concurrence", "entanglement_of_formation_2q",
    "log_negativity", "STATE_BOUNDS", "is_ppt", "root_fidelity",
]
