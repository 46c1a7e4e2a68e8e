import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entcost import bounds, channels, qcore
from entcost.variational import sample_mixed_unitary
from entcost.channels import (bipartite_channel_cost_lb, channel_cost_lb, collective_dephased_swap,
                              werner_holevo)
from entcost.qcore import KrausChannel

SWAP = channels._swap(2)


def cptp_error(ch):
    s = sum(k.conj().T @ k for k in ch.kraus)
    return np.max(np.abs(s - np.eye(ch.dim_in)))


def test_werner_holevo_choi_formula():
    for d in (2, 3):
        j = qcore.choi_state(werner_holevo(d).realized).matrix
        phi = qcore.max_entangled(d).matrix
        expected = (np.eye(d * d) - d * qcore.partial_transpose(phi, (d, d))) / (d * (d - 1))
        np.testing.assert_allclose(j, expected, atol=1e-12)
    j2 = qcore.choi_state(werner_holevo(2).realized).matrix
    # the d = 2 Choi state is the singlet projector
    assert np.isclose(np.trace(j2 @ j2).real, 1)
    j3 = qcore.choi_state(werner_holevo(3).realized)
    assert np.isclose(np.trace(j3.matrix).real, 1)
    assert not qcore.is_ppt(j3)


def test_werner_holevo_action():
    d = 3
    rho = qcore.random_state((3, 1), seed=0).matrix
    np.testing.assert_allclose(werner_holevo(d)(rho), (np.eye(d) - rho.T) / (d - 1), atol=1e-12)


def test_constructors_are_cptp():
    chans = [
        channels.identity_channel(3), werner_holevo(4), channels.depolarizing(0.3, 3),
        channels.completely_dephasing(3), channels.amplitude_damping(0.4),
        channels.thermal_damping_to_one(0.2), collective_dephased_swap(0.3, 0.7),
        channels.xxz_noisy_step(1.2, 0.1), sample_mixed_unitary([0.4, 0.4, 0.1, 0.1], 4, 3),
    ]
    for ch in chans:
        assert cptp_error(ch) < 1e-10


def test_depolarizing_action():
    rho = qcore.random_state((2, 1), seed=1).matrix
    out = channels.depolarizing(0.3)(rho)
    np.testing.assert_allclose(out, 0.3 * rho + 0.7 * np.eye(2) / 2, atol=1e-12)


def test_parameter_domains():
    with pytest.raises(qcore.ValidationError):
        channels.amplitude_damping(1.5)
    with pytest.raises(qcore.ValidationError):
        collective_dephased_swap(-0.1, 0.0)
    with pytest.raises(qcore.ValidationError):
        channels.mixed_unitary([0.5, 0.6], [np.eye(2), np.eye(2)])
    with pytest.raises(qcore.ChannelValidationError):
        channels.mixed_unitary([1.0], [np.ones((2, 2))])


def test_channel_cost_examples():
    assert abs(channel_cost_lb(channels.identity_channel(2)).value_bits - 1) < 1e-5
    assert channel_cost_lb(channels.depolarizing(0.0, 2)).value_bits <= 1e-6


def test_werner_holevo_three_is_between_zero_and_log_d():
    v = channel_cost_lb(werner_holevo(3)).value_bits
    assert 0 < v <= math.log2(3)


def test_bipartite_examples():
    ideal = KrausChannel([SWAP])
    assert abs(bipartite_channel_cost_lb(ideal, (2, 2, 2, 2)).value_bits - 2) < 1e-5
    v = bipartite_channel_cost_lb(collective_dephased_swap(0.5, math.pi / 2), (2, 2, 2, 2)).value_bits
    assert abs(v - 1) < 0.05
    rng = np.random.default_rng(2)
    local = KrausChannel([np.kron(qcore.haar_unitary(2, rng), qcore.haar_unitary(2, rng))])
    assert bipartite_channel_cost_lb(local, (2, 2, 2, 2)).value_bits <= 1e-6
    with pytest.raises(qcore.DimensionError):
        bipartite_channel_cost_lb(ideal, (2, 2, 2))


def test_dephased_swap_reductions():
    swap_choi = qcore.choi_state(KrausChannel([SWAP])).matrix
    for ch in (collective_dephased_swap(0.37, 0.0), collective_dephased_swap(1.0, 1.1)):
        np.testing.assert_allclose(qcore.choi_state(ch.realized).matrix, swap_choi, atol=1e-12)


def test_xxz_identity_at_zero():
    ch = channels.xxz_noisy_step(0.0, 0.0)
    assert bipartite_channel_cost_lb(ch, (2, 2, 2, 2)).value_bits <= 1e-6


def test_noisy_bell():
    np.testing.assert_allclose(channels.noisy_bell(0.0, 1.0).matrix, qcore.max_entangled(2).matrix, atol=1e-14)
    rho = channels.noisy_bell(1.0, 0.7)
    # damping on A to |0> leaves a product state
    np.testing.assert_allclose(rho.matrix, np.kron(np.diag([1, 0]), np.eye(2) / 2), atol=1e-14)
    assert bounds.e_nb2_half(rho).value_bits <= 1e-6


def test_kraus_from_choi_round_trip():
    ch = sample_mixed_unitary([0.4, 0.4, 0.1, 0.1], 2, 5)
    j = sum(np.kron(np.eye(2)[:, [i]] @ np.eye(2)[[k], :], ch(np.eye(2)[:, [i]] @ np.eye(2)[[k], :]))
            for i in range(2) for k in range(2))
    rebuilt = KrausChannel(channels.kraus_from_choi(j / 2, 2, 2))
    rho = qcore.random_state((2, 1), seed=4).matrix
    np.testing.assert_allclose(rebuilt(rho), ch(rho), atol=1e-12)


def test_named_shorthand_and_json():
    ch = channels.channel_from_json({"name": "werner_holevo", "params": {"d": 3}})
    assert ch.kind == "werner_holevo"
    back = channels.channel_from_json(json.loads(json.dumps(ch.to_dict())))
    np.testing.assert_allclose(back.kraus[0], ch.kraus[0])
    mu = sample_mixed_unitary([0.5, 0.5], 2, 7)
    again = channels.channel_from_json(json.loads(json.dumps(mu.to_dict())))
    rho = qcore.random_state((2, 1), seed=8).matrix
    np.testing.assert_allclose(again(rho), mu(rho), atol=1e-12)
    with pytest.raises(qcore.ValidationError):
        channels.named_channel("nope")
    with pytest.raises(qcore.ValidationError):
        channels.named_channel("depolarizing", q=0.1)


def test_sample_mixed_unitary_determinism():
    a = sample_mixed_unitary([1.0], 3, 11)
    b = sample_mixed_unitary([1.0], 3, 11)
    assert len(a.kraus) == 1
    np.testing.assert_array_equal(a.kraus[0], b.kraus[0])


def _relabel(ch):
    return KrausChannel([SWAP @ k @ SWAP for k in ch.kraus])


@settings(max_examples=4, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, math.pi))
def test_bipartite_cut_symmetry(p, t):
    ch = channels.xxz_noisy_step(t, 0.1 * p).realized
    a = bipartite_channel_cost_lb(ch, (2, 2, 2, 2), with_dual=False).value_bits
    b = bipartite_channel_cost_lb(_relabel(ch), (2, 2, 2, 2), with_dual=False).value_bits
    assert abs(a - b) < 1e-6
