"""Named channels and dynamical entanglement-cost lower bounds via Choi states."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import bounds
from .bounds import BoundResult
from .qcore import (ChannelValidationError, DimensionError, KrausChannel, ValidationError, BipartiteState,
                    channel_from_dict, choi_state, evolve, max_entangled, xxz_hamiltonian)


@dataclass(frozen=True)
class NamedChannel:
    """A channel constructor call together with its Kraus realization."""

    kind: str
    params: dict
    realized: KrausChannel = field(repr=False)

    @property
    def dim_in(self):
        return self.realized.dim_in

    @property
    def dim_out(self):
        return self.realized.dim_out

    @property
    def kraus(self):
        return self.realized.kraus

    def __call__(self, rho):
        return self.realized(rho)

    def apply_to(self, rho, dims, subsystem):
        return self.realized.apply_to(rho, dims, subsystem)

    def to_dict(self) -> dict:
        return {"name": self.kind, "params": _jsonable(self.params)}


def _jsonable(params):
    """Plain JSON values; complex arrays become nested ``[re, im]`` pairs."""
    out = {}
    for k, v in params.items():
        if isinstance(v, (list, tuple, np.ndarray)) and np.iscomplexobj(np.asarray(v)):
            a = np.asarray(v, dtype=complex)
            v = np.stack([a.real, a.imag], axis=-1).tolist()
        elif isinstance(v, np.ndarray):
            v = v.tolist()
        out[k] = v
    return out


def _prob(name, x):
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValidationError(f"{name} must lie in [0, 1], got {x}")
    return x


def as_kraus(channel) -> KrausChannel:
    return channel.realized if isinstance(channel, NamedChannel) else channel


def kraus_from_choi(j, dim_in: int, dim_out: int, cutoff: float = 1e-13) -> list:
    """Kraus operators of the map whose normalized Choi state (reference, output) is ``j``."""
    w, v = np.linalg.eigh(dim_in * np.asarray(j))
    out = []
    for lam, vec in zip(w, v.T):
        if lam > cutoff:
            out.append(np.sqrt(lam) * vec.reshape(dim_in, dim_out).T)
    return out


def identity_channel(d: int = 2) -> NamedChannel:
    return NamedChannel("identity", {"d": int(d)}, KrausChannel([np.eye(d)]))


def werner_holevo(d: int) -> NamedChannel:
    """``rho -> (I - rho^T)/(d - 1)``."""
    d = int(d)
    if d < 2:
        raise ValidationError("werner_holevo needs d >= 2")
    swap = _swap(d)
    j = (np.eye(d * d) - swap) / (d * (d - 1))
    return NamedChannel("werner_holevo", {"d": d}, KrausChannel(kraus_from_choi(j, d, d), d, d))


def _weyl(d):
    shift = np.roll(np.eye(d), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return [np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
            for a in range(d) for b in range(d)]


def depolarizing(p: float, d: int = 2) -> NamedChannel:
    """``rho -> p rho + (1 - p) tr(rho) I/d``; ``p`` is the weight kept, as in the noisy-Bell example."""
    p = _prob("p", p)
    d = int(d)
    ws = _weyl(d)
    ks = [np.sqrt(p + (1 - p) / d ** 2) * ws[0]]
    ks += [np.sqrt((1 - p) / d ** 2) * w for w in ws[1:]]
    return NamedChannel("depolarizing", {"p": p, "d": d}, KrausChannel(ks, d, d))


def completely_dephasing(d: int = 2) -> NamedChannel:
    ks = []
    for i in range(d):
        k = np.zeros((d, d))
        k[i, i] = 1.0
        ks.append(k)
    return NamedChannel("completely_dephasing", {"d": int(d)}, KrausChannel(ks, d, d))


def amplitude_damping(gamma: float) -> NamedChannel:
    """Damping toward ``|0>``."""
    g = _prob("gamma", gamma)
    k0 = np.array([[1, 0], [0, np.sqrt(1 - g)]])
    k1 = np.array([[0, np.sqrt(g)], [0, 0]])
    return NamedChannel("amplitude_damping", {"gamma": g}, KrausChannel([k0, k1]))


def thermal_damping_to_one(gamma: float) -> NamedChannel:
    """Damping toward ``|1>``."""
    g = _prob("gamma", gamma)
    k0 = np.array([[np.sqrt(1 - g), 0], [0, 1]])
    k1 = np.array([[0, 0], [np.sqrt(g), 0]])
    return NamedChannel("thermal_damping_to_one", {"gamma": g}, KrausChannel([k0, k1]))


def _swap(d):
    s = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            s[j * d + i, i * d + j] = 1.0
    return s


def mixed_unitary(probs, unitaries) -> NamedChannel:
    probs = np.asarray(probs, dtype=float)
    if probs.ndim != 1 or len(probs) != len(unitaries) or len(probs) == 0:
        raise ValidationError("need one probability per unitary")
    if np.any(probs < 0) or abs(probs.sum() - 1) > 1e-10:
        raise ValidationError("probabilities must be nonnegative and sum to 1")
    us = [np.asarray(u, dtype=complex) for u in unitaries]
    for u in us:
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise DimensionError("unitaries must be square")
        if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > 1e-10:
            raise ChannelValidationError("mixed_unitary got a non-unitary matrix")
    ks = [np.sqrt(p) * u for p, u in zip(probs, us) if p > 0]
    return NamedChannel("mixed_unitary", {"probs": probs.tolist(), "unitaries": [u.tolist() for u in us]},
                        KrausChannel(ks))


def collective_dephased_swap(p: float, phi: float) -> NamedChannel:
    """Two-qubit SWAP followed, with probability ``1 - p``, by ``diag(1, e^{i phi}, e^{i phi}, e^{2 i phi})``."""
    p = _prob("p", p)
    phi = float(phi)
    s = _swap(2)
    u = np.diag(np.exp(1j * phi * np.array([0, 1, 1, 2])))
    ks = [k for k in (np.sqrt(p) * s, np.sqrt(1 - p) * u @ s) if np.any(k)]
    return NamedChannel("collective_dephased_swap", {"p": p, "phi": phi}, KrausChannel(ks, 4, 4))


def xxz_noisy_step(t: float, gamma: float) -> NamedChannel:
    """XXZ two-qubit evolution for time ``t`` followed by damping toward ``|1>`` on the first qubit."""
    t = float(t)
    if t < 0:
        raise ValidationError("t must be nonnegative")
    u = evolve(xxz_hamiltonian(), t)
    damp = thermal_damping_to_one(gamma)
    ks = [np.kron(k, np.eye(2)) @ u for k in damp.kraus]
    return NamedChannel("xxz_step", {"t": t, "gamma": float(gamma)}, KrausChannel(ks, 4, 4))


def noisy_bell(gamma: float, p: float) -> BipartiteState:
    """``(A_gamma (x) D_p)(Phi+)``: damping on arm A, depolarizing on arm B."""
    a = amplitude_damping(gamma)
    dep = depolarizing(p, 2)
    rho = max_entangled(2).matrix
    rho = a.apply_to(rho, (2, 2), 0)
    rho = dep.apply_to(rho, (2, 2), 1)
    return BipartiteState((rho + rho.conj().T) / 2, (2, 2))


CONSTRUCTORS = {
    "identity": identity_channel,
    "werner_holevo": werner_holevo,
    "depolarizing": depolarizing,
    "completely_dephasing": completely_dephasing,
    "amplitude_damping": amplitude_damping,
    "thermal_damping_to_one": thermal_damping_to_one,
    "collective_dephased_swap": collective_dephased_swap,
    "xxz_step": xxz_noisy_step,
    "mixed_unitary": mixed_unitary,
}


def named_channel(name: str, **params) -> NamedChannel:
    try:
        ctor = CONSTRUCTORS[name]
    except KeyError:
        raise ValidationError(f"unknown channel {name!r}; known: {sorted(CONSTRUCTORS)}") from None
    if name == "mixed_unitary" and "unitaries" in params:
        params = dict(params)
        params["unitaries"] = [_decode_unitary(u) for u in params["unitaries"]]
    try:
        return ctor(**params)
    except TypeError as exc:
        raise ValidationError(f"bad parameters for {name}: {exc}") from None


def _decode_unitary(u):
    a = np.asarray(u)
    if a.ndim == 3 and a.shape[-1] == 2:
        return a[..., 0] + 1j * a[..., 1]
    return a.astype(complex)


def channel_from_json(data: dict):
    """Kraus JSON record or the ``{"name": ..., "params": {...}}`` shorthand."""
    if not isinstance(data, dict):
        raise ValidationError("channel record must be a JSON object")
    if "name" in data:
        return named_channel(data["name"], **data.get("params", {}))
    return channel_from_dict(data)


def choi_bound(channel, bound: str = "e_nb2_half", bipartite=None, **kw) -> BoundResult:
    """Any registered state bound evaluated on the Choi state of ``channel``."""
    try:
        fn = bounds.STATE_BOUNDS[bound]
    except KeyError:
        raise ValidationError(f"unknown bound {bound!r}; known: {sorted(bounds.STATE_BOUNDS)}") from None
    j = choi_state(as_kraus(channel), bipartite)
    return fn(j, **kw)


def channel_cost_lb(channel, **kw) -> BoundResult:
    """``E_NB,2^{1/2}`` of the Choi state, reference : output cut."""
    res = choi_bound(channel, "e_nb2_half", None, **kw)
    res.name = "channel_cost_lb"
    return res


def bipartite_channel_cost_lb(channel, dims, **kw) -> BoundResult:
    """``E_NB,2^{1/2}`` of the Choi state of ``AB -> A'B'`` across ``Ahat A' : Bhat B'``."""
    if len(tuple(dims)) != 4:
        raise DimensionError("dims must be (dA, dB, dA_out, dB_out)")
    res = choi_bound(channel, "e_nb2_half", tuple(dims), **kw)
    res.name = "bipartite_channel_cost_lb"
    res.metadata["dims"] = list(dims)
    return res
