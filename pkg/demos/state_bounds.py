"""Compare the state bounds on a few standard two-party states."""

import numpy as np

from entcost import bounds, channels, qcore
from entcost.harness.experiments import rho_v

states = {
    "bell(2)": qcore.max_entangled(2),
    "bell(3)": qcore.max_entangled(3),
    "rho_v": rho_v(0.0),
    "noisy_bell(0.1, 0.8)": channels.noisy_bell(0.1, 0.8),
    "random 3x3 rank 4": qcore.random_state((3, 3), rank=4, seed=0),
    "maximally mixed 2x2": qcore.BipartiteState(np.eye(4) / 4, (2, 2)),
}

names = ["e_nb2_half", "e_eta", "tempered_negativity"]
print(f"{'state':24s}" + "".join(f"{n:>22s}" for n in names) + f"{'log_neg':>10s}")
for label, rho in states.items():
    vals = [bounds.STATE_BOUNDS[n](rho).value_bits for n in names]
    print(f"{label:24s}" + "".join(f"{v:22.5f}" for v in vals) + f"{bounds.log_negativity(rho):10.5f}")

# primal and dual certificates bracket the same value
rho = qcore.random_state((2, 3), rank=2, seed=4)
p, d = bounds.e_nb2_half(rho, with_dual=False), bounds.e_nb2_half_dual(rho)
print(f"\nprimal {p.value_bits:.8f}  dual {d.value_bits:.8f}")

# the Rains bound sits below E_NB2 for the antisymmetric state
r = bounds.rel_entropy_to_set(rho_v(0.0), "PPT'")
print(f"rho_v: E_NB2 = {bounds.e_nb2_half(rho_v(0.0)).value_bits:.5f}, Rains = {r.value_bits:.5f}")
