import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entcost import qcore
from entcost.qcore import (BipartiteState, DimensionError, HermitianOperator, KrausChannel,
                           StateValidationError, SubsystemLayout)
from entcost.harness.experiments import rho_v


def phi_plus(d):
    return qcore.max_entangled(d).matrix


def test_tensor_identity_and_diag():
    np.testing.assert_allclose(qcore.tensor(np.eye(2), np.eye(2)), np.eye(4))
    out = qcore.tensor(np.diag([1, 0]), np.diag([0, 1]))
    np.testing.assert_allclose(out, np.diag([0, 1, 0, 0]))


def test_tensor_of_bell_pairs_is_rank_one_projector():
    m = qcore.tensor(phi_plus(2), phi_plus(2))
    assert m.shape == (16, 16)
    np.testing.assert_allclose(m @ m, m, atol=1e-14)
    assert np.isclose(np.trace(m), 1)
    assert np.linalg.matrix_rank(m) == 1


def test_tensor_index_convention():
    rng = np.random.default_rng(0)
    a, b = rng.standard_normal((2, 2)), rng.standard_normal((3, 3))
    m = qcore.tensor(a, b).reshape(2, 3, 2, 3)
    assert np.isclose(m[1, 2, 0, 1], a[1, 0] * b[2, 1])


def test_partial_transpose_involution_and_products():
    rho = qcore.random_state((2, 3), seed=1).matrix
    lay = SubsystemLayout((2, 3))
    twice = qcore.partial_transpose(qcore.partial_transpose(rho, lay), lay)
    np.testing.assert_allclose(twice, rho, atol=1e-15)

    sa = qcore.random_state((2, 1), seed=3).matrix
    sb = qcore.random_state((1, 3), seed=4).matrix
    pt = qcore.partial_transpose(np.kron(sa, sb), lay)
    np.testing.assert_allclose(pt, np.kron(sa, sb.T), atol=1e-15)


def test_partial_transpose_of_bell_state():
    w = np.linalg.eigvalsh(qcore.partial_transpose(phi_plus(2), (2, 2)))
    np.testing.assert_allclose(w, [-0.5, 0.5, 0.5, 0.5], atol=1e-14)


def test_partial_trace():
    for d in (2, 3):
        np.testing.assert_allclose(qcore.partial_trace(phi_plus(d), (d, d), "B"), np.eye(d) / d, atol=1e-15)
    sa = qcore.random_state((3, 1), seed=5).matrix
    sb = 2.0 * qcore.random_state((1, 2), seed=6).matrix
    np.testing.assert_allclose(qcore.partial_trace(np.kron(sa, sb), (3, 2), "B"), 2.0 * sa, atol=1e-14)


def test_partial_trace_of_rho_v():
    m = qcore.partial_trace(rho_v(0).matrix, (3, 3), "A")
    assert m.shape == (3, 3)
    assert np.isclose(np.trace(m).real, 1)
    # brute-force oracle: sum over the A index
    t = rho_v(0).matrix.reshape(3, 3, 3, 3)
    np.testing.assert_allclose(m, sum(t[i, :, i, :] for i in range(3)), atol=1e-15)


def test_permute_systems():
    sa = qcore.random_state((2, 1), seed=7).matrix
    sb = qcore.random_state((1, 3), seed=8).matrix
    lay = SubsystemLayout((2, 3))
    np.testing.assert_allclose(qcore.permute_systems(np.kron(sa, sb), lay, ("A", "B")), np.kron(sa, sb))
    np.testing.assert_allclose(qcore.permute_systems(np.kron(sa, sb), lay, ("B", "A")), np.kron(sb, sa),
                               atol=1e-15)


def test_permute_choi_round_trip():
    ch = qcore.KrausChannel([qcore.evolve(qcore.xxz_hamiltonian(), 0.3)])
    j = ch.apply_to(phi_plus(4), (4, 4), 1)
    lay = SubsystemLayout((2, 2, 2, 2), ("A", "B", "A'", "B'"))
    fwd = qcore.permute_systems(j, lay, ("A", "A'", "B", "B'"))
    back_lay = SubsystemLayout((2, 2, 2, 2), ("A", "A'", "B", "B'"))
    np.testing.assert_allclose(qcore.permute_systems(fwd, back_lay, ("A", "B", "A'", "B'")), j, atol=1e-15)


def test_trace_norm_examples():
    assert np.isclose(qcore.trace_norm(qcore.random_state((3, 3), seed=9).matrix), 1)
    assert np.isclose(qcore.trace_norm(np.diag([1.0, -2.0])), 3)
    for d in (2, 3, 4):
        assert np.isclose(qcore.trace_norm(qcore.partial_transpose(phi_plus(d), (d, d))), d)


def test_fidelity_examples():
    rho = qcore.random_state((2, 2), seed=10).matrix
    assert np.isclose(qcore.fidelity(rho, rho), 1)
    rng = np.random.default_rng(11)
    psi = qcore.ginibre(4, rng)
    phi = qcore.ginibre(4, rng)
    psi, phi = psi / np.linalg.norm(psi), phi / np.linalg.norm(phi)
    f = qcore.fidelity(np.outer(psi, psi.conj()), np.outer(phi, phi.conj()))
    assert np.isclose(f, abs(np.vdot(psi, phi)) ** 2)
    assert np.isclose(qcore.fidelity(phi_plus(2), np.eye(4) / 4), 0.25)


def test_is_ppt_examples():
    assert not qcore.is_ppt(qcore.max_entangled(2))
    assert qcore.is_ppt(BipartiteState(np.eye(6) / 6, (2, 3)))
    assert not qcore.is_ppt(rho_v(0))


def test_max_entangled():
    assert np.allclose(qcore.max_entangled(1).matrix, [[1]])
    m = qcore.max_entangled(2).matrix
    expected = np.zeros((4, 4))
    expected[np.ix_([0, 3], [0, 3])] = 0.5
    np.testing.assert_allclose(m, expected)
    np.testing.assert_allclose(qcore.partial_trace(qcore.max_entangled(3).matrix, (3, 3)), np.eye(3) / 3,
                               atol=1e-15)


def test_choi_state():
    ident = KrausChannel([np.eye(2)])
    np.testing.assert_allclose(qcore.choi_state(ident).matrix, phi_plus(2), atol=1e-15)
    d = 3
    dep = KrausChannel([np.kron(np.eye(d)[:, [i]], np.eye(d)[[j], :]) / np.sqrt(d)
                        for i in range(d) for j in range(d)])
    np.testing.assert_allclose(qcore.choi_state(dep).matrix, np.eye(d * d) / d ** 2, atol=1e-15)


def test_choi_state_bipartite_dims_checked():
    ch = KrausChannel([np.eye(4)])
    with pytest.raises(DimensionError):
        qcore.choi_state(ch, (2, 3, 2, 2))


def test_random_state():
    pure = qcore.random_state((3, 3), rank=1, seed=0).matrix
    assert np.isclose(np.trace(pure @ pure).real, 1)
    full = qcore.random_state((3, 3), rank=9, seed=0).matrix
    assert np.linalg.eigvalsh(full)[0] > 0
    np.testing.assert_array_equal(qcore.random_state((3, 3), seed=42).matrix,
                                  qcore.random_state((3, 3), seed=42).matrix)
    with pytest.raises(qcore.ValidationError):
        qcore.random_state((2, 2), rank=5)


def test_evolve():
    np.testing.assert_allclose(qcore.evolve(qcore.xxz_hamiltonian(), 0.0), np.eye(4), atol=1e-15)
    np.testing.assert_allclose(qcore.evolve(qcore.Z, np.pi / 2), np.diag([np.exp(-1j * np.pi / 2),
                                                                          np.exp(1j * np.pi / 2)]), atol=1e-15)
    u = qcore.evolve(qcore.xxz_hamiltonian(), 1.57)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(4), atol=1e-13)
    # oracle: truncated Taylor series of the exponential
    h = qcore.xxz_hamiltonian()
    term, series = np.eye(4, dtype=complex), np.eye(4, dtype=complex)
    for n in range(1, 40):
        term = term @ (-1j * h * 1.57) / n
        series = series + term
    np.testing.assert_allclose(u, series, atol=1e-12)


def test_validation_errors():
    with pytest.raises(StateValidationError, match="trace"):
        BipartiteState(0.9 * np.eye(4) / 4, (2, 2))
    with pytest.raises(StateValidationError, match="positive"):
        BipartiteState(np.diag([1.5, -0.5, 0, 0]), (2, 2))
    with pytest.raises(DimensionError):
        BipartiteState(np.eye(4) / 4, (2, 3))
    with pytest.raises(qcore.ValidationError):
        HermitianOperator([[0, 1], [0, 0]])
    with pytest.raises(qcore.ChannelValidationError):
        KrausChannel([np.eye(2) * 0.9])
    with pytest.raises(qcore.ChannelValidationError):
        KrausChannel([])
    with pytest.raises(DimensionError):
        SubsystemLayout((2, 2), ("A", "A"))


def test_hermitian_operator_is_readonly():
    op = HermitianOperator(np.eye(2))
    with pytest.raises(ValueError):
        op.matrix[0, 0] = 2


def test_state_json_round_trip():
    s = qcore.random_state((2, 3), seed=3)
    back = qcore.state_from_dict(qcore.state_to_dict(s))
    np.testing.assert_array_equal(back.matrix, s.matrix)
    assert back.dims == (2, 3)


def _psd(rng, n):
    g = qcore.ginibre((n, n), rng)
    return g @ g.conj().T


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(2, 4), st.integers(2, 3))
def test_partial_transpose_preserves_trace_and_spectrum_sum(seed, da, db):
    rho = qcore.random_state((da, db), seed=seed).matrix
    pt = qcore.partial_transpose(rho, (da, db))
    assert np.isclose(np.trace(pt).real, 1)
    np.testing.assert_allclose(pt, pt.conj().T, atol=1e-14)
    # transposing A equals the full transpose of transposing B
    np.testing.assert_allclose(qcore.partial_transpose(rho, (da, db), "A"), pt.T, atol=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(1, 4))
def test_sandwiched_trace_norm_dominated(seed, n):
    rng = np.random.default_rng(seed)
    B = _psd(rng, n)
    C = qcore.ginibre((n, n), rng)
    C = (C + C.conj().T) / 2
    C /= max(np.linalg.norm(C, 2), 1e-12)
    Bh = qcore.psd_sqrt(B)
    A = Bh @ C @ Bh
    assert qcore.trace_norm(A) <= np.trace(B).real + 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_fidelity_symmetric_and_bounded(seed):
    rng = np.random.default_rng(seed)
    r = qcore.random_state((2, 2), seed=rng.integers(1 << 30)).matrix
    s = qcore.random_state((2, 2), seed=rng.integers(1 << 30)).matrix
    f = qcore.fidelity(r, s)
    assert -1e-12 <= f <= 1 + 1e-12
    assert np.isclose(f, qcore.fidelity(s, r), atol=1e-10)
