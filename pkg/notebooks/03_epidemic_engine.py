"""
The daily epidemic step
=======================

Agents move S -> E -> presymptomatic -> (symptomatic | asymptomatic) ->
recovered -> S. Masks scale every transmission by 0.2 per masked party.
"""

import numpy as np

from maskabm.calibration import calibrate_to_r0
from maskabm.epidemic import DiseaseParams, State, compartment_counts, seed_outbreak, step_day, transmission_multiplier
from maskabm.graph import generate_barabasi_albert

params = DiseaseParams()
g, _ = calibrate_to_r0(generate_barabasi_albert(2000, 22000, seed=4), 5.0, 0.2, params=params)

print("multipliers:", [transmission_multiplier(a, b, 0.8) for a, b in ((0, 0), (1, 0), (1, 1))])


def run(masked_share, days=200, seed=0):
    rng = np.random.default_rng(seed)
    masks = rng.random(g.n_nodes) < masked_share
    health = seed_outbreak(g.n_nodes, params, seed)
    infectious, total = [], 0
    for _ in range(days):
        health, new = step_day(health, masks, g, params, rng)
        total += len(new)
        c = compartment_counts(health)
        infectious.append(c[State.PRESYMPTOMATIC] + c[State.SYMPTOMATIC] + c[State.ASYMPTOMATIC])
    return total, max(infectious), int(np.argmax(infectious))


for share in (0.0, 0.3, 0.6, 0.9):
    total, peak, day = run(share)
    print(f"{share:.0%} masked: {total:5d} infections, peak {peak:4d} infectious on day {day}")
