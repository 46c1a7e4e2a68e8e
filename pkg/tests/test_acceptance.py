"""Acceptance criteria 1-14, each at its stated tolerance.

Every test prints one PASS/FAIL line; the lines are repeated in the
terminal summary.  Run with ``pytest tests/test_acceptance.py -v``.
"""

import math
import time

import numpy as np

from entcost import bounds, channels, qcore
from entcost.bounds import FWParams
from entcost.harness.experiments import ExperimentSpec, ppt_threshold, rho_v, run
from entcost.qcore import BipartiteState, SubsystemLayout

# reduced optimizer budget for criterion 13 (the experiment default is 100 steps)
VARIATIONAL_STEPS = 12


def joint(r0, r1):
    """``rho0 (x) rho1`` regrouped as ``A0 A1 : B0 B1``."""
    da0, db0 = r0.dims
    da1, db1 = r1.dims
    lay = SubsystemLayout((da0, db0, da1, db1), ("A0", "B0", "A1", "B1"))
    m = qcore.permute_systems(np.kron(r0.matrix, r1.matrix), lay, ("A0", "A1", "B0", "B1"))
    return BipartiteState(m, (da0 * da1, db0 * db1))


def test_criterion_01_normalization(record):
    worst, slowest, ok = 0.0, 0.0, True
    for d in (2, 3, 4):
        t0 = time.perf_counter()
        res = bounds.e_nb2_half(qcore.max_entangled(d))
        dt = time.perf_counter() - t0
        err = abs(res.value_bits - math.log2(d))
        worst, slowest = max(worst, err), max(slowest, dt)
        ok &= res.ok and err <= 1e-5 and dt < 10
    assert record(1, ok, f"max |E - log2 d| = {worst:.2e} (tol 1e-5), slowest {slowest:.2f} s (limit 10 s)")


def test_criterion_02_faithfulness(record):
    wrong, n_ppt = [], 0
    for i in range(100):
        rho = qcore.random_state((3, 3), rank=1 + i % 9, seed=i)
        ppt = qcore.is_ppt(rho)
        n_ppt += ppt
        v = bounds.e_nb2_half(rho).value_bits
        if (v <= 1e-6) != ppt:
            wrong.append((i, ppt, v))
    ok = not wrong
    assert record(2, ok, f"{len(wrong)} misclassified of 100 ({n_ppt} PPT, {100 - n_ppt} NPT) {wrong[:3]}")


def test_criterion_03_strong_duality(record):
    worst_f, worst_bits = 0.0, 0.0
    dims = [(2, 2), (2, 3), (3, 3)]
    for i in range(20):
        rho = qcore.random_state(dims[i % 3], rank=1 + i % 4, seed=1000 + i)
        primal = bounds.e_nb2_half(rho, with_dual=False)
        dual = bounds.e_nb2_half_dual(rho)
        worst_f = max(worst_f, abs(primal.root_fidelity - dual.root_fidelity))
        worst_bits = max(worst_bits, abs(primal.metadata["raw_value"] - dual.metadata["raw_value"]))
    ok = worst_f <= 1e-6 and worst_bits <= 1e-6
    assert record(3, ok, f"max primal/dual difference {worst_f:.2e} (root fidelity), {worst_bits:.2e} bits")


def test_criterion_04_additivity(record):
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(10):
        r0 = qcore.random_state((2, 2), rank=2, seed=2000 + 2 * i)
        r1 = qcore.random_state((2, 2), rank=2, seed=2001 + 2 * i)
        e0 = bounds.e_nb2_half(r0, with_dual=False).value_bits
        e1 = bounds.e_nb2_half(r1, with_dual=False).value_bits
        e01 = bounds.e_nb2_half(joint(r0, r1), with_dual=False).value_bits
        worst = max(worst, abs(e01 - e0 - e1))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-4 and dt < 60
    assert record(4, ok, f"max |E(r0 x r1) - E(r0) - E(r1)| = {worst:.2e} (tol 1e-4), {dt:.1f} s (limit 60 s)")


def test_criterion_05_werner_holevo(record):
    t0 = time.perf_counter()
    res = channels.channel_cost_lb(channels.werner_holevo(5))
    dt = time.perf_counter() - t0
    ok = res.ok and res.value_bits > 0.4854 and res.value_bits > math.log2(4 / 3) and dt < 300
    assert record(5, ok, f"value {res.value_bits:.7f} (> 0.4854, > {math.log2(4 / 3):.4f}), {dt:.1f} s")


def test_criterion_06_irreversibility(record):
    margins, gaps = {}, {}
    for p in (0.0, 0.005, 0.01, 0.015):
        rho = rho_v(p)
        e = bounds.e_nb2_half(rho)
        r = bounds.rel_entropy_to_set(rho, "PPT'", FWParams(gap_tol=1e-4))
        gaps[p] = r.metadata["fw_gap"]
        # true Rains value lies in [value - gap, value]; count the gap against the margin
        margins[p] = e.value_bits - r.value_bits - gaps[p]
    ok = all(m > 0 for m in margins.values()) and all(g <= 1e-3 for g in gaps.values())
    detail = ", ".join(f"p={p}: {m:+.5f}" for p, m in margins.items())
    assert record(6, ok, f"E_NB2 - Rains - fw_gap: {detail}; max fw_gap {max(gaps.values()):.1e}")


def test_criterion_07_noisy_bell(record):
    gamma = 0.1
    thr = ppt_threshold(gamma)
    bad = []
    n_full, n_ppt = 0, 0
    for p in [round(0.05 * i, 2) for i in range(21)]:
        rho = channels.noisy_bell(gamma, p)
        nb2 = bounds.e_nb2_half(rho).value_bits
        if qcore.is_ppt(rho):
            n_ppt += 1
            if nb2 != 0.0:
                bad.append(("ppt", p, nb2))
            continue
        if np.linalg.eigvalsh(rho.matrix)[0] <= qcore.EIG_CUTOFF:
            continue
        n_full += 1
        eta = bounds.e_eta(rho).value_bits
        tau = bounds.tempered_negativity(rho).value_bits
        if eta > 1e-6 or tau > 1e-6 or nb2 <= 1e-3:
            bad.append(("npt", p, eta, tau, nb2))
    ok = not bad and n_full > 0 and n_ppt > 0
    assert record(7, ok, f"{n_full} full-rank NPT points, {n_ppt} PPT points, violations {bad}; "
                         f"PPT threshold p = {thr:.4f} (noise weight 1-p = {1 - thr:.4f}, quoted 0.66)")


def test_criterion_08_xxz_curve(record):
    res = run(ExperimentSpec("xxz_curve", {"gamma": [0.1], "t_steps": 20}))
    by = {}
    for r in res.rows:
        by.setdefault(r.params["t"], {})[r.bound] = r.value
    t_star = max(by, key=lambda t: by[t]["e_nb2_half"])
    dominated = [t for t, v in by.items()
                 if v["e_nb2_half"] < max(v["e_eta"], v["tempered_negativity"]) - 1e-6]
    statuses = {r.status for r in res.rows}
    ok = abs(t_star - 1.57) <= 0.16 and not dominated and statuses == {"optimal"}
    assert record(8, ok, f"argmax t = {t_star:.4f} (1.57 +/- 0.16), value {by[t_star]['e_nb2_half']:.4f}; "
                         f"points where a comparison bound exceeds E_NB2: {dominated}")


def test_criterion_09_dephased_swap(record):
    grid = [round(0.1 * i, 1) for i in range(11)]
    res = run(ExperimentSpec("swap_dephase", {"phi": [math.pi / 2, math.pi / 10], "p": grid}))
    v = {(r.params["phi"], r.params["p"]): r.value for r in res.rows}
    half = v[(math.pi / 2, 0.5)]
    ends = (v[(math.pi / 2, 0.0)], v[(math.pi / 2, 1.0)])
    curve = [v[(math.pi / 10, p)] for p in grid]
    p_min = grid[int(np.argmin(curve))]
    ok = 0.95 <= half <= 1.05 and all(1.99 <= e <= 2.01 for e in ends) and p_min == 0.5
    assert record(9, ok, f"phi=pi/2: p=1/2 -> {half:.5f}, p=0,1 -> {ends[0]:.5f}, {ends[1]:.5f}; "
                         f"phi=pi/10 minimum at p={p_min}")


def test_criterion_10_hierarchy(record):
    res = run(ExperimentSpec("hierarchy_audit", {"n_samples": 20, "k": [1, 2, 3]}, seed=10))
    m = res.meta
    ok = m["ppt_all_members"] and m["npt_all_rejected_k2"] and m["monotone_in_k"]
    assert record(10, ok, f"PPT members k=2,3: {m['ppt_all_members']}, NPT rejected k=2: "
                          f"{m['npt_all_rejected_k2']}, monotone in k: {m['monotone_in_k']}")


def test_criterion_11_fidelity_oracle(record):
    worst = 0.0
    dims = [(2, 2), (2, 3), (3, 3)]
    for i in range(20):
        d = dims[i % 3]
        n = d[0] * d[1]
        r = qcore.random_state(d, rank=1 + i % n, seed=3000 + i)
        s = qcore.random_state(d, rank=1 + (i + 2) % n, seed=4000 + i)
        worst = max(worst, abs(bounds.fidelity_sdp(r, s) - qcore.root_fidelity(r.matrix, s.matrix)))
    assert record(11, worst <= 1e-6, f"max |SDP - closed form| = {worst:.2e} (tol 1e-6)")


def test_criterion_12_hash_bound(record):
    worst_dual, worst_mult = 0.0, -math.inf
    for i in range(5):
        rho = qcore.random_state((2, 2), rank=2, seed=5000 + i)
        p = bounds.e_hash2_lower(rho)
        d = bounds.e_hash2_dual(rho)
        worst_dual = max(worst_dual, abs(p.root_fidelity - d.root_fidelity))
        pp = bounds.e_hash2_lower(joint(rho, rho))
        worst_mult = max(worst_mult, pp.root_fidelity - p.root_fidelity ** 2)
    ok = worst_dual <= 1e-6 and worst_mult <= 1e-6
    assert record(12, ok, f"max primal/dual difference {worst_dual:.2e}; "
                          f"max f(rho x rho) - f(rho)^2 = {worst_mult:.2e} (tol 1e-6)")


def test_criterion_13_variational(record):
    res = run(ExperimentSpec("variational_vs_choi", {"n_channels": 20, "steps": VARIATIONAL_STEPS}, seed=13))
    vals = {}
    for r in res.rows:
        vals.setdefault(r.params["channel"], {})[r.bound] = r.value
    diffs = [v["variational"] - v["choi"] for v in vals.values()]
    below = [i for i, dd in enumerate(diffs) if dd < -1e-6]
    frac = float(np.mean([dd > 1e-4 for dd in diffs]))
    ok = len(diffs) == 20 and not below and frac >= 0.5
    assert record(13, ok, f"channels below Choi bound: {below}; improved by > 1e-4: {frac:.0%} "
                          f"(soft target 50%), min gain {min(diffs):.2e}, steps={VARIATIONAL_STEPS}")


def test_criterion_14_sandwiched_trace_norm(record):
    rng = np.random.default_rng(14)
    worst = -math.inf
    for _ in range(200):
        n = int(rng.integers(1, 7))
        g = qcore.ginibre((n, n), rng)
        B = g @ g.conj().T
        C = qcore.ginibre((n, n), rng)
        C = (C + C.conj().T) / 2
        C /= np.linalg.norm(C, 2)
        Bh = qcore.psd_sqrt(B)
        A = Bh @ C @ Bh
        worst = max(worst, qcore.trace_norm(A) - np.trace(B).real)
    assert record(14, worst <= 1e-9, f"max ||A||_1 - tr B = {worst:.2e} over 200 samples (tol 1e-9)")
