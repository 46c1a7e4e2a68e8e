"""Linear-algebra and quantum-information primitives.

Everything here works on plain ``numpy`` arrays; the small wrapper types
(:class:`HermitianOperator`, :class:`BipartiteState`, :class:`KrausChannel`)
only validate their contents once and then behave like arrays via
``__array__``.  Logarithms are base 2 throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
STATE_TOL = 1e-10
CPTP_TOL = 1e-10
EIG_CUTOFF = 1e-12


class ValidationError(ValueError):
    """Input data violates a documented invariant."""


class StateValidationError(ValidationError):
    pass


class ChannelValidationError(ValidationError):
    pass


class DimensionError(ValidationError):
    pass


class SolverError(RuntimeError):
    """A numerical solve did not reach a certified answer."""

    def __init__(self, message, status=None):
        super().__init__(message)
        self.status = status


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


def _hermitize(m, tol=HERMITIAN_TOL):
    m = np.array(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    scale = max(1.0, np.max(np.abs(m))) if m.size else 1.0
    if dev > tol * scale:
        raise ValidationError(f"matrix is not Hermitian (deviation {dev:.3e})")
    return (m + m.conj().T) / 2


class HermitianOperator:
    """Immutable Hermitian matrix, symmetrized on construction."""

    __slots__ = ("_m",)

    def __init__(self, matrix, tol: float = HERMITIAN_TOL):
        m = _hermitize(matrix, tol)
        if m.shape[0] < 1:
            raise DimensionError("dimension must be at least 1")
        m.setflags(write=False)
        self._m = m

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @property
    def dim(self) -> int:
        return self._m.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self._m if dtype is None else self._m.astype(dtype)

    def __repr__(self):
        return f"HermitianOperator(dim={self.dim})"


class BipartiteState(HermitianOperator):
    """Density matrix on ``A (x) B`` with explicit subsystem dimensions."""

    __slots__ = ("dims",)

    def __init__(self, matrix, dims: Sequence[int], tol: float = STATE_TOL):
        super().__init__(matrix)
        dims = tuple(int(d) for d in dims)
        if len(dims) != 2 or min(dims) < 1:
            raise DimensionError(f"need two positive subsystem dimensions, got {dims}")
        if dims[0] * dims[1] != self.dim:
            raise DimensionError(f"dims {dims} do not multiply to matrix dimension {self.dim}")
        tr = np.trace(self._m).real
        if abs(tr - 1) > tol:
            raise StateValidationError(f"trace must be 1, got {tr:.12g}")
        lmin = np.linalg.eigvalsh(self._m)[0]
        if lmin < -tol:
            raise StateValidationError(f"state is not positive semidefinite (min eigenvalue {lmin:.3e})")
        self.dims = dims

    @property
    def layout(self) -> "SubsystemLayout":
        return SubsystemLayout(self.dims)

    def __repr__(self):
        return f"BipartiteState(dims={self.dims})"


class KrausChannel:
    """CPTP map given by Kraus operators of shape ``(dim_out, dim_in)``."""

    __slots__ = ("kraus", "dim_in", "dim_out")

    def __init__(self, kraus, dim_in: int | None = None, dim_out: int | None = None, tol: float = CPTP_TOL):
        ks = [np.array(k, dtype=complex) for k in kraus]
        if not ks:
            raise ChannelValidationError("Kraus list is empty")
        shape = ks[0].shape
        if len(shape) != 2:
            raise DimensionError("Kraus operators must be matrices")
        dim_out = shape[0] if dim_out is None else int(dim_out)
        dim_in = shape[1] if dim_in is None else int(dim_in)
        for k in ks:
            if k.shape != (dim_out, dim_in):
                raise DimensionError(f"Kraus operator of shape {k.shape}, expected {(dim_out, dim_in)}")
        s = sum(k.conj().T @ k for k in ks)
        dev = np.max(np.abs(s - np.eye(dim_in)))
        if dev > tol:
            raise ChannelValidationError(f"channel is not trace preserving (deviation {dev:.3e})")
        for k in ks:
            k.setflags(write=False)
        self.kraus = tuple(ks)
        self.dim_in = dim_in
        self.dim_out = dim_out

    def __call__(self, rho):
        rho = np.asarray(rho)
        return sum(k @ rho @ k.conj().T for k in self.kraus)

    def apply_to(self, rho, dims: Sequence[int], subsystem: int):
        """Apply the channel to one factor of a multipartite operator."""
        dims = list(dims)
        if dims[subsystem] != self.dim_in:
            raise DimensionError("channel input does not match subsystem dimension")
        left = int(np.prod(dims[:subsystem]))
        right = int(np.prod(dims[subsystem + 1:]))
        rho = np.asarray(rho)
        out = 0
        for k in self.kraus:
            big = np.kron(np.kron(np.eye(left), k), np.eye(right))
            out = out + big @ rho @ big.conj().T
        return out

    def __repr__(self):
        return f"KrausChannel(dim_in={self.dim_in}, dim_out={self.dim_out}, rank={len(self.kraus)})"


@dataclass(frozen=True)
class SubsystemLayout:
    dims: tuple
    labels: tuple = ()

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        labels = tuple(self.labels) or tuple("ABCDEFGHIJKLMNOPQRSTUVWXYZ"[: len(dims)])
        if len(labels) != len(dims):
            raise DimensionError("need one label per subsystem")
        if len(set(labels)) != len(labels):
            raise DimensionError(f"labels must be distinct: {labels}")
        if min(dims, default=1) < 1:
            raise DimensionError("subsystem dimensions must be positive")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims))

    def index(self, subsystem) -> int:
        if isinstance(subsystem, (int, np.integer)):
            if not 0 <= subsystem < len(self.dims):
                raise DimensionError(f"subsystem index {subsystem} out of range")
            return int(subsystem)
        try:
            return self.labels.index(subsystem)
        except ValueError:
            raise DimensionError(f"unknown subsystem {subsystem!r}; layout has {self.labels}") from None


def as_layout(layout) -> SubsystemLayout:
    if isinstance(layout, SubsystemLayout):
        return layout
    if isinstance(layout, BipartiteState):
        return layout.layout
    return SubsystemLayout(tuple(layout))


def _check_square(m, layout):
    if m.shape != (layout.total, layout.total):
        raise DimensionError(f"matrix shape {m.shape} does not match layout {layout.dims}")


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def tensor(*ops) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, np.asarray(op))
    return out


def ptranspose_permutation(dims: Sequence[int], subsystem: int) -> np.ndarray:
    """Index map on row-major ``vec`` realizing the partial transpose.

    ``vec(M^T_k)[i] == vec(M)[perm[i]]``.
    """
    dims = list(dims)
    n = len(dims)
    D = int(np.prod(dims))
    idx = np.arange(D * D).reshape(dims + dims)
    return np.swapaxes(idx, subsystem, n + subsystem).reshape(-1)


def partial_transpose(m, layout, subsystem="B") -> np.ndarray:
    layout = as_layout(layout)
    m = np.asarray(m)
    _check_square(m, layout)
    k = layout.index(subsystem)
    n = len(layout.dims)
    t = m.reshape(layout.dims + layout.dims)
    return np.swapaxes(t, k, n + k).reshape(m.shape)


def partial_trace(m, layout, subsystem="B") -> np.ndarray:
    layout = as_layout(layout)
    m = np.asarray(m)
    _check_square(m, layout)
    k = layout.index(subsystem)
    n = len(layout.dims)
    t = m.reshape(layout.dims + layout.dims)
    t = np.trace(t, axis1=k, axis2=n + k)
    d = layout.total // layout.dims[k]
    return t.reshape(d, d)


def permute_systems(m, layout, order) -> np.ndarray:
    """Reorder tensor factors; ``order`` lists labels (or indices) in the new order."""
    layout = as_layout(layout)
    m = np.asarray(m)
    _check_square(m, layout)
    perm = [layout.index(o) for o in order]
    if sorted(perm) != list(range(len(layout.dims))):
        raise DimensionError(f"{list(order)} is not a permutation of {layout.labels}")
    n = len(perm)
    t = m.reshape(layout.dims + layout.dims)
    t = np.transpose(t, perm + [n + p for p in perm])
    return t.reshape(m.shape)


def trace_norm(m) -> float:
    m = np.asarray(m)
    if np.allclose(m, m.conj().T, atol=1e-12):
        return float(np.sum(np.abs(np.linalg.eigvalsh((m + m.conj().T) / 2))))
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def psd_sqrt(m) -> np.ndarray:
    w, v = np.linalg.eigh((np.asarray(m) + np.asarray(m).conj().T) / 2)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def root_fidelity(rho, sigma) -> float:
    """``tr |sqrt(rho) sqrt(sigma)|``, the square root of Uhlmann's fidelity."""
    sigma = np.asarray(sigma)
    lmin = np.linalg.eigvalsh((sigma + sigma.conj().T) / 2)[0]
    if lmin < -STATE_TOL:
        raise ValidationError(f"sigma is not positive semidefinite (min eigenvalue {lmin:.3e})")
    s = psd_sqrt(sigma)
    inner = s @ np.asarray(rho) @ s
    w = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
    return float(np.sum(np.sqrt(np.clip(w, 0, None))))


def fidelity(rho, sigma) -> float:
    return root_fidelity(rho, sigma) ** 2


def is_ppt(rho, tol: float | None = None, layout=None) -> bool:
    """True iff the smallest eigenvalue of the partial transpose is ``>= -tol``.

    The default ``tol`` is the relative eigenvalue cutoff ``1e-12 * ||rho^T_B||``.
    """
    layout = as_layout(layout if layout is not None else rho)
    pt = partial_transpose(np.asarray(rho), layout, layout.labels[-1])
    w = np.linalg.eigvalsh(pt)
    if tol is None:
        tol = EIG_CUTOFF * max(np.max(np.abs(w)), 1e-300)
    return bool(w[0] >= -tol)


def negativity_spectrum(rho, layout=None) -> np.ndarray:
    layout = as_layout(layout if layout is not None else rho)
    return np.linalg.eigvalsh(partial_transpose(np.asarray(rho), layout, layout.labels[-1]))


def max_entangled(d: int) -> BipartiteState:
    if d < 1:
        raise DimensionError("d must be >= 1")
    v = np.zeros(d * d, dtype=complex)
    v[:: d + 1] = 1 / np.sqrt(d)
    return BipartiteState(np.outer(v, v.conj()), (d, d))


def pure_state(psi, dims) -> BipartiteState:
    psi = np.asarray(psi, dtype=complex).ravel()
    psi = psi / np.linalg.norm(psi)
    return BipartiteState(np.outer(psi, psi.conj()), dims)


def support_projector(m, rel_cutoff: float = EIG_CUTOFF) -> np.ndarray:
    w, v = np.linalg.eigh(np.asarray(m))
    keep = w > rel_cutoff * max(np.max(np.abs(w)), 1e-300)
    return v[:, keep] @ v[:, keep].conj().T


def rank(m, rel_cutoff: float = EIG_CUTOFF) -> int:
    w = np.linalg.eigvalsh(np.asarray(m))
    return int(np.sum(w > rel_cutoff * max(np.max(np.abs(w)), 1e-300)))


def choi_state(channel: KrausChannel, bipartite: Sequence[int] | None = None) -> BipartiteState:
    """Normalized Choi state ``(id (x) N)(Phi+)``.

    Point-to-point (default): subsystem order (reference, output).  With
    ``bipartite=(dA, dB, dA_out, dB_out)`` the channel is read as
    ``AB -> A'B'`` and the result is laid out as ``Ahat A' : Bhat B'``.
    """
    d = channel.dim_in
    phi = max_entangled(d).matrix
    j = channel.apply_to(phi, (d, d), 1)
    if bipartite is None:
        return BipartiteState(j, (d, channel.dim_out))
    da, db, da2, db2 = (int(x) for x in bipartite)
    if da * db != channel.dim_in or da2 * db2 != channel.dim_out:
        raise DimensionError(
            f"bipartite dims {bipartite} inconsistent with channel {channel.dim_in}->{channel.dim_out}")
    lay = SubsystemLayout((da, db, da2, db2), ("Ah", "Bh", "A'", "B'"))
    j = permute_systems(j, lay, ("Ah", "A'", "Bh", "B'"))
    return BipartiteState(j, (da * da2, db * db2))


def ginibre(shape, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_state(dims: Sequence[int], rank: int | None = None, seed=None) -> BipartiteState:
    """Fixed-rank random state ``G G^dag / tr(G G^dag)`` from a Ginibre ``G``.

    At full rank this is the Hilbert-Schmidt measure.
    """
    dims = tuple(dims)
    d = int(np.prod(dims))
    rank = d if rank is None else int(rank)
    if not 1 <= rank <= d:
        raise ValidationError(f"rank must lie in [1, {d}], got {rank}")
    rng = np.random.default_rng(seed)
    g = ginibre((d, rank), rng)
    rho = g @ g.conj().T
    return BipartiteState(rho / np.trace(rho).real, dims)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(ginibre((d, d), rng))
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def evolve(h, t: float) -> np.ndarray:
    """``exp(-i H t)`` through the eigendecomposition of ``H``."""
    w, v = np.linalg.eigh(np.asarray(HermitianOperator(h)))
    return (v * np.exp(-1j * w * t)) @ v.conj().T


# Pauli matrices
I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)


def xxz_hamiltonian(jx: float = -0.5, jy: float = -0.5, jz: float = -1.0) -> np.ndarray:
    return jx * np.kron(X, X) + jy * np.kron(Y, Y) + jz * np.kron(Z, Z)


def entropy(rho) -> float:
    w = np.linalg.eigvalsh(np.asarray(rho))
    w = w[w > 1e-300]
    return float(-np.sum(w * np.log2(w)))


# ---------------------------------------------------------------------------
# JSON encoding: complex matrices as row-major lists of [re, im] pairs
# ---------------------------------------------------------------------------


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[float(z.real), float(z.imag)] for z in m.ravel()]


def decode_matrix(pairs, rows: int, cols: int) -> np.ndarray:
    try:
        arr = np.asarray(pairs, dtype=float)
    except (TypeError, ValueError) as exc:
        raise DimensionError(f"matrix entries must be [re, im] pairs: {exc}") from None
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DimensionError("matrix entries must be [re, im] pairs")
    if arr.shape[0] != rows * cols:
        raise DimensionError(f"expected {rows * cols} entries for a {rows}x{cols} matrix, got {arr.shape[0]}")
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(rows, cols)


def state_to_dict(state: BipartiteState) -> dict:
    return {"dims": list(state.dims), "matrix": encode_matrix(state.matrix)}


def state_from_dict(data: dict) -> BipartiteState:
    try:
        dims = [int(d) for d in data["dims"]]
        entries = data["matrix"]
    except (KeyError, TypeError, ValueError) as exc:
        raise DimensionError(f"state record needs 'dims' and 'matrix': {exc}") from None
    if len(dims) != 2:
        raise DimensionError(f"'dims' must have two entries, got {dims}")
    d = dims[0] * dims[1]
    return BipartiteState(decode_matrix(entries, d, d), dims)


def channel_to_dict(channel: KrausChannel) -> dict:
    return {
        "dim_in": channel.dim_in,
        "dim_out": channel.dim_out,
        "kraus": [encode_matrix(k) for k in channel.kraus],
    }


def channel_from_dict(data: dict) -> KrausChannel:
    try:
        din, dout = int(data["dim_in"]), int(data["dim_out"])
        kraus = data["kraus"]
    except (KeyError, TypeError, ValueError) as exc:
        raise DimensionError(f"channel record needs 'dim_in', 'dim_out' and 'kraus': {exc}") from None
    return KrausChannel([decode_matrix(k, dout, din) for k in kraus], din, dout)
