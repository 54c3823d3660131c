"""
Instance-based memory
=====================

Stored (state, action, value) instances are retrieved by similarity and
blended into a value estimate; a Boltzmann rule turns two estimates into a
masking probability.
"""

import numpy as np

from maskabm.behavior import RewardWeights, reward
from maskabm.cogibl import (
    MASK,
    UNMASK,
    PolicyParams,
    blend,
    learn,
    mask_probability,
    matching_score,
    retrieval_probabilities,
    seed_boundary_memory,
)

print("score (0.5,0.5,0.5) vs (1,1,1), mu=1:", matching_score((0.5, 0.5, 0.5), (1, 1, 1), 1.0))
print("retrieval of activations (0, -1.5) at tau=0.25:", retrieval_probabilities([0.0, -1.5], 0.25).round(5))

# Every agent starts from the reward at the 8 corners of the state cube
w = RewardWeights()
mem = seed_boundary_memory(lambda s, a: reward(s, a, w), mu=1.0, tau=0.25)
for s in [(0, 0, 0), (0.5, 0.1, 0.05), (0.5, 0.5, 0.3), (1, 1, 1)]:
    qm, qu = blend(mem, s, MASK), blend(mem, s, UNMASK)
    print(f"s={s}: Q(mask)={qm:6.3f} Q(unmask)={qu:6.3f} P(mask)={mask_probability(qm, qu, 5.0):.3f}")

# The kernel width mu/tau decides how local the estimate is
for mu in (0.5, 1.0, 5.0):
    sharp = seed_boundary_memory(lambda s, a: reward(s, a, w), mu=mu, tau=0.25)
    print(f"mu={mu}: Q(mask | 20% local infection) = {blend(sharp, (0.5, 0.2, 0.1), MASK):.3f}")

# Experience overrides the seeds near where it was gathered
for _ in range(5):
    learn(mem, (0.5, 0.2, 0.1), MASK, -1.0, None, PolicyParams())
print("after five bad outcomes:", round(blend(mem, (0.5, 0.2, 0.1), MASK), 3))
print(mem.dumps().splitlines()[0])
print(np.round([i.q for i in mem.instances[-3:]], 2))
