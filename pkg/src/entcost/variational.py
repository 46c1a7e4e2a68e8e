"""Variational channel inputs that tighten the Choi-state bound.

The ansatz acts on ``2n`` qubits: the first ``n`` wires are the channel
input ``A``, the last ``n`` the reference ``A'``.  Each of the ``D`` blocks
is a column of ``R_y`` rotations followed by a CNOT ring (wire ``i``
controls ``i + 1``, the last wire controls the first); a final ``R_y``
column closes the circuit, so there are ``(D + 1) x 2n`` angles.
"""

from __future__ import annotations

import csv
import hashlib
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import bounds
from .channels import NamedChannel, as_kraus, mixed_unitary
from .qcore import BipartiteState, DimensionError, SolverError, ValidationError, haar_unitary

GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class AnsatzParams:
    n_qubits: int
    depth: int
    angles: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n_qubits < 1 or self.depth < 0:
            raise ValidationError("need n_qubits >= 1 and depth >= 0")
        a = np.array(self.angles, dtype=float)
        if a.shape != (self.depth + 1, 2 * self.n_qubits):
            raise DimensionError(f"angles must have shape {(self.depth + 1, 2 * self.n_qubits)}, got {a.shape}")
        a.setflags(write=False)
        object.__setattr__(self, "angles", a)

    @property
    def width(self):
        return 2 * self.n_qubits

    def with_angles(self, angles):
        return AnsatzParams(self.n_qubits, self.depth, angles)

    def digest(self) -> str:
        return hashlib.sha1(np.ascontiguousarray(self.angles).tobytes()).hexdigest()[:12]


@dataclass(frozen=True)
class OptimizerConfig:
    steps: int = 100
    step_size: float = 0.07
    seed: int = 0
    include_mes_init: bool = True
    depth: int = 10

    def __post_init__(self):
        if self.steps < 0:
            raise ValidationError("steps must be >= 0")
        if self.step_size <= 0:
            raise ValidationError("step_size must be positive")
        if self.depth < 0:
            raise ValidationError("depth must be >= 0")


def _ry(theta):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]])


def _apply_1q(psi, u, q):
    psi = np.tensordot(u, psi, axes=([1], [q]))
    return np.moveaxis(psi, 0, q)


def _apply_cnot(psi, c, t):
    psi = psi.copy()
    idx = [slice(None)] * psi.ndim
    idx[c] = 1
    idx = tuple(idx)
    tt = t if t < c else t - 1
    psi[idx] = np.flip(psi[idx], axis=tt)
    return psi


def _ring(w):
    return [(i, (i + 1) % w) for i in range(w)] if w > 1 else []


def ansatz_state(params: AnsatzParams) -> np.ndarray:
    w = params.width
    psi = np.zeros((2,) * w, dtype=complex)
    psi[(0,) * w] = 1.0
    for block in range(params.depth + 1):
        for q in range(w):
            if params.angles[block, q] != 0.0:
                psi = _apply_1q(psi, _ry(params.angles[block, q]), q)
        if block < params.depth:
            for c, t in _ring(w):
                psi = _apply_cnot(psi, c, t)
    return psi.reshape(-1)


def _ring_matrix(w):
    """The CNOT ring as a linear map on bit vectors over GF(2)."""
    L = np.eye(w, dtype=np.int64)
    for c, t in _ring(w):
        step = np.eye(w, dtype=np.int64)
        step[t, c] = 1
        L = step @ L % 2
    return L


def _gf2_invertible(m):
    m = m.copy() % 2
    n = m.shape[0]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r, col]), None)
        if piv is None:
            return False
        m[[col, piv]] = m[[piv, col]]
        for r in range(n):
            if r != col and m[r, col]:
                m[r] ^= m[col]
    return True


def mes_params(n_qubits: int, depth: int) -> AnsatzParams:
    """Angles preparing a maximally entangled state between ``A`` and ``A'``.

    ``R_y(pi/2)`` on a set ``S`` of ``n`` wires in column ``c`` (all other
    angles 0) gives the uniform superposition over ``L^(D-c) span(e_S)``,
    with ``L`` the ring map.  That is maximally entangled when both halves
    of ``L^(D-c)`` restricted to ``S`` are invertible.
    """
    w = 2 * n_qubits
    L = _ring_matrix(w)
    for c in range(depth, -1, -1):
        P = np.linalg.matrix_power(L, depth - c) % 2
        for S in itertools.combinations(range(w), n_qubits):
            sub = P[:, list(S)]
            if _gf2_invertible(sub[:n_qubits]) and _gf2_invertible(sub[n_qubits:]):
                angles = np.zeros((depth + 1, w))
                angles[c, list(S)] = math.pi / 2
                return AnsatzParams(n_qubits, depth, angles)
    raise ValidationError(f"no maximally entangled configuration at depth {depth}")


def _n_qubits(channel) -> int:
    d = as_kraus(channel).dim_in
    n = int(round(math.log2(d)))
    if 2 ** n != d:
        raise DimensionError(f"channel input dimension {d} is not a power of two")
    return n


def output_state(channel, params: AnsatzParams) -> BipartiteState:
    ch = as_kraus(channel)
    if 2 ** params.n_qubits != ch.dim_in:
        raise DimensionError(f"ansatz has {params.n_qubits} input qubits, channel expects dimension {ch.dim_in}")
    psi = ansatz_state(params)
    d = ch.dim_in
    rho = ch.apply_to(np.outer(psi, psi.conj()), (d, d), 0)
    return BipartiteState((rho + rho.conj().T) / 2, (ch.dim_out, d))


def loss(channel, params: AnsatzParams, **solve_kw) -> float:
    """``E_NB,2^{1/2}`` of ``(N (x) id)(psi(theta))`` across output : reference, in bits."""
    return bounds.e_nb2_half(output_state(channel, params), with_dual=False, **solve_kw).value_bits


@dataclass
class OptimizeResult:
    params: AnsatzParams
    value: float
    evaluations: int
    trace: list = field(repr=False, default_factory=list)
    mes_value: float | None = None

    def __iter__(self):
        return iter((self.params, self.value))

    def write_trace(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["step", "theta_hash", "value"])
            for row in self.trace:
                wr.writerow([row[0], row[1], repr(row[2])])


def optimize(channel, cfg: OptimizerConfig | None = None, trace_path=None, **solve_kw) -> OptimizeResult:
    """Maximize :func:`loss` by coordinate-wise golden-section sweeps.

    Candidates (a seeded uniform start and, if enabled, the maximally
    entangled configuration) are evaluated first; the best one seeds the
    sweeps.  Each coordinate is searched on ``[theta_i - h, theta_i + h]``
    with ``h = cfg.step_size``.  ``cfg.steps`` bounds the number of loss
    evaluations after the candidates.  Solver failures count as ``-inf``.
    """
    cfg = cfg or OptimizerConfig()
    n = _n_qubits(channel)
    rng = np.random.default_rng(cfg.seed)
    trace = []
    count = 0

    def f(p):
        nonlocal count
        try:
            v = loss(channel, p, **solve_kw)
        except SolverError:
            v = -math.inf
        trace.append((count, p.digest(), v))
        count += 1
        return v

    start = AnsatzParams(n, cfg.depth, rng.uniform(0, 2 * math.pi, (cfg.depth + 1, 2 * n)))
    cands = [start]
    if cfg.include_mes_init:
        cands.insert(0, mes_params(n, cfg.depth))
    vals = [f(p) for p in cands]
    mes_value = vals[0] if cfg.include_mes_init else None
    k = int(np.argmax(vals))
    best, fbest = cands[k], vals[k]

    budget = cfg.steps
    h = cfg.step_size
    # the last R_y column is a local unitary and cannot change the value
    coords = [(i, j) for i in range(cfg.depth) for j in range(2 * n)]
    while budget > 0 and coords:
        for idx in rng.permutation(len(coords)):
            if budget <= 0:
                break
            i, j = coords[idx]
            theta0 = best.angles[i, j]

            def at(x):
                a = best.angles.copy()
                a[i, j] = x
                return best.with_angles(a)

            lo, hi = theta0 - h, theta0 + h
            c = hi - GOLDEN * (hi - lo)
            d = lo + GOLDEN * (hi - lo)
            pc, pd = at(c), at(d)
            fc = f(pc)
            budget -= 1
            if budget <= 0:
                if fc > fbest:
                    best, fbest = pc, fc
                break
            fd = f(pd)
            budget -= 1
            local = [(fbest, best), (fc, pc), (fd, pd)]
            if budget > 0:
                # one golden refinement inside the better half
                if fc >= fd:
                    hi = d
                    e = hi - GOLDEN * (hi - lo)
                else:
                    lo = c
                    e = lo + GOLDEN * (hi - lo)
                pe = at(e)
                local.append((f(pe), pe))
                budget -= 1
            fv, pv = max(local, key=lambda t: t[0])
            if fv > fbest:
                best, fbest = pv, fv
    res = OptimizeResult(best, fbest, count, trace, mes_value)
    if trace_path is not None:
        res.write_trace(trace_path)
    return res


def sample_mixed_unitary(probs, d: int, seed: int) -> NamedChannel:
    """Mixed-unitary channel with Haar-random unitaries drawn from ``seed``."""
    probs = np.asarray(probs, dtype=float)
    if probs.ndim != 1 or probs.size == 0 or np.any(probs < 0) or abs(probs.sum() - 1) > 1e-10:
        raise ValidationError("probs must be a nonnegative vector summing to 1")
    rng = np.random.default_rng(seed)
    us = [haar_unitary(int(d), rng) for _ in probs]
    return mixed_unitary(probs, us)
