"""Variational input states against the Choi-state bound for one channel."""

from entcost import channels
from entcost.variational import OptimizerConfig, optimize, sample_mixed_unitary

ch = sample_mixed_unitary([0.4, 0.4, 0.1, 0.1], 4, seed=3)
choi = channels.channel_cost_lb(ch, with_dual=False).value_bits
res = optimize(ch, OptimizerConfig(steps=10, depth=4, seed=0))
print(f"Choi bound      {choi:.6f}")
print(f"MES start       {res.mes_value:.6f}")
print(f"optimized       {res.value:.6f}  ({res.evaluations} evaluations)")
