"""
Edge sampling on a single attack path
=====================================

Routers 1..n sit between the attacker (behind router n) and the victim
(behind router 1).  Each router marks a passing packet with probability p;
later marks overwrite earlier ones, so the edge nearest the victim is the
easiest to collect.
"""
import numpy as np

from ppm_traceback import PathParameters, ReconstructionState, build_distribution, transmit_packet
from ppm_traceback.edge_sampling import transmit_packets

params = PathParameters(n=16, lam=1.0)
rng = np.random.default_rng(0)

# One packet, routed hop by hop
for _ in range(5):
    print(transmit_packet(params, rng))

# A million packets: observed edge frequencies against p (1 - p)^(i - 1)
marked, start, end, distance = transmit_packets(params, rng, 10**6)
observed = np.bincount(np.where(marked, distance + 1, 0), minlength=17) / 10**6
expected = build_distribution(params).probabilities
print(f"{'edge':>4} {'observed':>9} {'expected':>9}")
for i in range(17):
    label = "none" if i == 0 else str(i)
    print(f"{label:>4} {observed[i]:9.5f} {expected[i]:9.5f}")

# The victim keeps reading packets until every edge has turned up
state = ReconstructionState(params.n)
while not state.receive(transmit_packet(params, rng)):
    pass
print(f"path of {params.n} routers rebuilt after {state.packets_processed} packets")
