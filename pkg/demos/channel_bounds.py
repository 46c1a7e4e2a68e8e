"""Channel lower bounds: Werner-Holevo channels and the dephased SWAP."""

import math

from entcost import channels
from entcost.qcore import KrausChannel

for d in (2, 3, 4):
    res = channels.channel_cost_lb(channels.werner_holevo(d))
    print(f"werner_holevo({d}): {res.value_bits:.5f} bits ({res.status})")

swap = KrausChannel([channels._swap(2)])
print(f"\nSWAP: {channels.bipartite_channel_cost_lb(swap, (2, 2, 2, 2)).value_bits:.5f} bits")
for p in (0.0, 0.25, 0.5, 0.75, 1.0):
    ch = channels.collective_dephased_swap(p, math.pi / 2)
    v = channels.bipartite_channel_cost_lb(ch, (2, 2, 2, 2)).value_bits
    print(f"dephased SWAP, phi=pi/2, p={p:.2f}: {v:.5f}")
