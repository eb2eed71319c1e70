"""
Cut bounds on a small repeater network
======================================

Builds a diamond network with a mix of channels, lists every cut and
finds the tightest one.  Run with ``python notebooks/network_bounds.py``.
"""

import numpy as np

from qnetbounds.channels import make_channel
from qnetbounds.network import (ContinuityProfile, Cut, Edge, NetworkGraph, cut_bound,
                                ebit_upper_bound, min_cut, mu_dephasing_family,
                                strong_converse_error)

edges = (
    Edge("A", "C1", make_channel("dephasing", 0.3), avg_uses=2),
    Edge("A", "C2", make_channel("amplitude_damping", 0.4), avg_uses=1),
    Edge("C1", "C2", make_channel("erasure", 0.5), avg_uses=1),
    Edge("C1", "B", make_channel("amplitude_damping", 0.2), avg_uses=1),
    Edge("B", "C2", make_channel("dephasing", 0.6), avg_uses=1.5),
)
net = NetworkGraph(("A", "C1", "C2", "B"), edges)

# %%
# Every bipartition of the two repeaters, with the versatile weight
# (E_R where the channel allows it, E_max elsewhere) next to the pure
# E_max weight.
for c_a in ((), ("C1",), ("C2",), ("C1", "C2")):
    b = cut_bound(net, Cut(frozenset(c_a)))
    print(f"C_A={list(c_a)!s:14s} edges={b.crossing_edges}  versatile={b.e_versatile:.4f}  "
          f"e_max={b.e_by_measure['e_max']:.4f}  mu={b.mu}")

best = min_cut(net, epsilon=0.05)
print("\nminimum cut:", sorted(best.cut.c_a), round(best.value, 6))
for (profile, eps), bound in best.ebit_bound.items():
    print(f"  {profile} bound at eps={eps}: {bound:.4f} ebits")

# %%
# The E_R continuity constants blow up at eps = 1/8; the E_max ones never do.
for eps in (0.0, 0.05, 0.1, 0.125, 0.3):
    er = ebit_upper_bound(best.value, ContinuityProfile.make("er_versatile", eps))
    em = ebit_upper_bound(best.value, ContinuityProfile.make("emax", eps))
    print(f"eps={eps:<6} er_versatile={er:<10.4f} emax={em:.4f}")

# %%
# Relative advantage over the squashed-entanglement weight for k dephasing
# channels and one amplitude damper sharing a cut.
x = np.linspace(0, 1, 5)
for k in (1, 5):
    print(f"k={k}:", np.round(mu_dephasing_family(k, x[:, None], x[None, :]), 3))

# %%
# Pushing past the bound costs exponentially in the number of uses.
print([round(strong_converse_error(1.5, n, 1.0, 2), 4) for n in (1, 4, 16, 64)])
