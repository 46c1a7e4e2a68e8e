import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entcost import bounds, channels, qcore
from entcost.bounds import FWParams
from entcost.harness.experiments import rho_v
from entcost.qcore import BipartiteState


def bell(d=2):
    return qcore.max_entangled(d)


def mixed(dims=(2, 2)):
    d = int(np.prod(dims))
    return BipartiteState(np.eye(d) / d, dims)


def werner(p):
    return BipartiteState(p * bell().matrix + (1 - p) * np.eye(4) / 4, (2, 2))


def full_rank_noisy_bell():
    return channels.noisy_bell(0.1, 0.8)


def local_unitary(rho, seed):
    rng = np.random.default_rng(seed)
    da, db = rho.dims
    u = np.kron(qcore.haar_unitary(da, rng), qcore.haar_unitary(db, rng))
    return BipartiteState(u @ rho.matrix @ u.conj().T, rho.dims)


# fidelity SDP


def test_fidelity_sdp_trivial_cases():
    r = qcore.random_state((2, 2), seed=0)
    assert abs(bounds.fidelity_sdp(r, r) - 1) < 1e-6
    e0 = np.diag([1.0, 0, 0, 0])
    e1 = np.diag([0, 1.0, 0, 0])
    assert abs(bounds.fidelity_sdp(BipartiteState(e0, (2, 2)), BipartiteState(e1, (2, 2)))) < 1e-6


@pytest.mark.parametrize("seed", range(6))
def test_fidelity_sdp_matches_uhlmann(seed):
    dims = [(2, 2), (2, 3), (3, 3)][seed % 3]
    r = qcore.random_state(dims, rank=1 + seed % 4, seed=seed)
    s = qcore.random_state(dims, seed=100 + seed)
    assert abs(bounds.fidelity_sdp(r, s) - qcore.root_fidelity(r.matrix, s.matrix)) < 1e-6


# E_NB,2


@pytest.mark.parametrize("d", [2, 3])
def test_e_nb2_normalization(d):
    res = bounds.e_nb2_half(bell(d))
    assert res.ok
    assert abs(res.value_bits - math.log2(d)) < 1e-5


def test_e_nb2_vanishes_on_ppt_states():
    for rho in (mixed(), mixed((3, 3)), werner(0.3)):
        assert qcore.is_ppt(rho)
        assert bounds.e_nb2_half(rho).value_bits <= 1e-6


def test_e_nb2_positive_on_rho_v_with_dual_certificate():
    res = bounds.e_nb2_half(rho_v(0))
    assert res.ok
    assert res.value_bits > 0.1
    q = res.witnesses["Q"]
    certified = -2 * math.log2(np.trace(q @ rho_v(0).matrix).real)
    assert certified <= res.value_bits + 1e-6
    assert abs(certified - res.value_bits) < 1e-5


def test_e_nb2_value_matches_root_fidelity():
    rho = qcore.random_state((2, 3), seed=3)
    res = bounds.e_nb2_half(rho)
    assert abs(res.metadata["raw_value"] + 2 * math.log2(res.root_fidelity)) < 1e-9
    sigma = res.witnesses["sigma"]
    assert abs(qcore.root_fidelity(rho.matrix, sigma) - res.root_fidelity) < 1e-6


def test_e_nb2_dual_examples():
    res = bounds.e_nb2_half_dual(bell())
    assert abs(res.root_fidelity - 1 / math.sqrt(2)) < 1e-6
    assert abs(res.value_bits - 1.0) < 1e-5
    res = bounds.e_nb2_half_dual(mixed())
    assert abs(res.root_fidelity - 1) < 1e-6
    assert res.value_bits <= 1e-6


@pytest.mark.parametrize("seed", range(4))
def test_e_nb2_strong_duality(seed):
    rho = qcore.random_state((2, 2) if seed % 2 else (3, 3), seed=seed)
    res = bounds.e_nb2_half(rho)
    assert res.ok
    assert res.gap <= 1e-6


def test_e_nb_k_examples():
    rho = qcore.random_state((3, 3), rank=2, seed=7)
    assert not qcore.is_ppt(rho)
    v1, v2, v3 = (bounds.e_nb_k_half(rho, k).value_bits for k in (1, 2, 3))
    assert abs(v2 - bounds.e_nb2_half(rho, with_dual=False).value_bits) < 1e-7
    assert v1 <= v2 + 1e-7 and v2 <= v3 + 1e-7
    for k in (1, 2, 3):
        assert bounds.e_nb_k_half(werner(0.3), k).value_bits <= 1e-6
    with pytest.raises(qcore.ValidationError):
        bounds.e_nb_k_half(rho, 0)


def test_ppt_certificate_gives_exact_zero():
    res = bounds.e_nb2_half(werner(0.2))
    assert res.metadata["ppt_certificate"]
    assert res.value_bits == 0.0


def test_ppt_k_membership():
    assert bounds.ppt_k_membership(werner(0.3).matrix, (2, 2), 3)
    assert not bounds.ppt_k_membership(werner(0.6).matrix, (2, 2), 2)
    assert bounds.ppt_k_membership(bell().matrix / 2, (2, 2), 2)
    with pytest.raises(qcore.ValidationError):
        bounds.ppt_k_membership(bell().matrix, (2, 2), 0)


# comparison bounds


def test_e_eta_examples():
    assert abs(bounds.e_eta(bell()).value_bits - 1) < 1e-5
    assert bounds.e_eta(mixed()).value_bits <= 1e-6
    rho = full_rank_noisy_bell()
    assert not qcore.is_ppt(rho)
    assert np.linalg.eigvalsh(rho.matrix)[0] > 1e-6
    assert bounds.e_eta(rho).value_bits <= 1e-6


def test_tempered_negativity_examples():
    assert abs(bounds.tempered_negativity(bell()).value_bits - 1) < 1e-5
    assert bounds.tempered_negativity(full_rank_noisy_bell()).value_bits <= 1e-6
    assert bounds.tempered_negativity(werner(0.3)).value_bits <= 1e-6


def test_tempered_negativity_below_log_negativity():
    for seed in range(3):
        rho = qcore.random_state((2, 2), rank=2, seed=seed)
        assert bounds.tempered_negativity(rho).value_bits <= bounds.log_negativity(rho) + 1e-6


def test_tempered_negativity_rank_deficient_witness():
    rho = qcore.random_state((2, 3), rank=2, seed=11)
    res = bounds.tempered_negativity(rho)
    assert res.ok
    A = res.witnesses["A"]
    val = np.trace(A @ rho.matrix).real
    # the witness is feasible for the unreduced program and attains the value
    assert abs(val - res.primal_value) < 1e-6
    assert np.max(np.abs(np.linalg.eigvalsh(A))) <= val + 1e-6
    assert np.max(np.abs(np.linalg.eigvalsh(qcore.partial_transpose(A, (2, 3))))) <= 1 + 1e-6
    assert abs(res.primal_value - res.dual_value) < 1e-6


# relative entropy


def test_relative_entropy_oracle():
    r = qcore.random_state((2, 2), seed=1).matrix
    s = qcore.random_state((2, 2), seed=2).matrix
    from scipy.linalg import logm
    expected = np.trace(r @ (logm(r) - logm(s))).real / math.log(2)
    assert abs(bounds.relative_entropy(r, s) - expected) < 1e-9


def test_rel_entropy_ppt_state_is_zero():
    res = bounds.rel_entropy_to_set(werner(0.3), "PPT")
    assert res.value_bits <= 1e-4


@pytest.mark.parametrize("d", [2, 3])
def test_rains_of_max_entangled(d):
    res = bounds.rel_entropy_to_set(bell(d), "PPT'", FWParams(gap_tol=1e-4))
    assert abs(res.value_bits - math.log2(d)) < 1e-3
    assert res.metadata["fw_gap"] <= 1e-4


def test_rains_of_rho_v_known_value():
    # the antisymmetric two-qutrit state has Rains bound log2(1 + 1/sqrt(2))
    res = bounds.rel_entropy_to_set(rho_v(0), "PPT'", FWParams(gap_tol=1e-5))
    assert abs(res.value_bits - math.log2(1 + 1 / math.sqrt(2))) < 1e-4


def test_rains_below_e_nb2_at_small_noise():
    rho = rho_v(0.01)
    r = bounds.rel_entropy_to_set(rho, "PPT'", FWParams(gap_tol=1e-4))
    e = bounds.e_nb2_half(rho, with_dual=False)
    assert r.value_bits < e.value_bits


def test_rel_entropy_sets_are_nested():
    rho = qcore.random_state((2, 2), rank=2, seed=4)
    params = FWParams(gap_tol=1e-5)
    ppt = bounds.rel_entropy_to_set(rho, "PPT", params).value_bits
    rains = bounds.rel_entropy_to_set(rho, "PPT'", params).value_bits
    ppt2 = bounds.rel_entropy_to_set(rho, "PPT_2", params).value_bits
    assert rains <= ppt + 2e-5
    assert ppt2 <= rains + 2e-5


def test_frank_wolfe_iteration_limit_reports_inaccurate():
    res = bounds.rel_entropy_to_set(rho_v(0), "PPT'", FWParams(max_iters=1, gap_tol=1e-12), method="fw")
    assert res.status == "inaccurate"
    assert res.metadata["fw_gap"] > 1e-12


def test_fw_params_validation():
    with pytest.raises(qcore.ValidationError):
        FWParams(gap_tol=0)


# hash bound


def test_hash_bound_examples():
    assert bounds.e_hash2_lower(werner(0.3)).value_bits <= 1e-6
    v = bounds.e_hash2_lower(bell()).value_bits
    assert 0 < v <= 1 + 1e-6
    d = bounds.e_hash2_dual(mixed())
    assert abs(d.root_fidelity - 1) < 1e-6


def test_hash_bound_primal_dual_agree():
    rho = qcore.random_state((2, 2), seed=5)
    p = bounds.e_hash2_lower(rho)
    d = bounds.e_hash2_dual(rho)
    assert abs(p.root_fidelity - d.root_fidelity) < 1e-6


# closed forms


def test_concurrence_and_formation():
    assert abs(bounds.concurrence(bell().matrix) - 1) < 1e-12
    assert abs(bounds.entanglement_of_formation_2q(bell().matrix) - 1) < 1e-12
    # Werner state: C = max(0, (3p - 1)/2)
    for p in (0.2, 0.5, 0.9):
        assert abs(bounds.concurrence(werner(p).matrix) - max(0, (3 * p - 1) / 2)) < 1e-10
    assert bounds.entanglement_of_formation_2q(mixed().matrix) == 0.0


def test_bound_result_serializes():
    import json
    res = bounds.e_nb2_half(bell())
    data = json.loads(json.dumps(res.to_dict(witnesses=True), default=float))
    assert data["bound"] == "e_nb2_half"
    assert "sigma" in data["witnesses"]


@settings(max_examples=6, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_e_nb2_local_unitary_invariance(seed):
    rho = qcore.random_state((2, 2), rank=2, seed=seed)
    a = bounds.e_nb2_half(rho, with_dual=False).value_bits
    b = bounds.e_nb2_half(local_unitary(rho, seed + 1), with_dual=False).value_bits
    assert abs(a - b) < 1e-6


@settings(max_examples=6, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(1, 2))
def test_e_nb2_nonnegative_and_faithful(seed, rank):
    rho = qcore.random_state((2, 2), rank=rank, seed=seed)
    v = bounds.e_nb2_half(rho, with_dual=False).value_bits
    assert v >= 0
    assert (v > 1e-6) == (not qcore.is_ppt(rho))
