"""
Contact networks
================

Build, save, reload and downsample the graphs the epidemic runs on.
"""

import tempfile
from pathlib import Path

import numpy as np

from maskabm.graph import (
    degree_histogram,
    generate_barabasi_albert,
    generate_uniform_random,
    load_edge_list,
    sample_and_rewire,
    write_edge_list,
)

# Preferential attachment: 2000 people, about 11 contacts each
ba = generate_barabasi_albert(2000, 22000, seed=1)
print(ba.n_nodes, "nodes,", ba.n_edges, "edges, max degree", ba.degree.max())

# Same density, no hubs
er = generate_uniform_random(2000, 22000, seed=1)
print("uniform graph max degree", er.degree.max())

# Heavy tail versus binomial tail
for name, g in (("BA", ba), ("uniform", er)):
    hist = degree_histogram(g.degree)
    top = sorted(hist)[-3:]
    print(f"{name:8s} highest degrees: {top}")

# Edge lists are plain text: "u v weight", with an optional node-count header
with tempfile.TemporaryDirectory() as tmp:
    path = write_edge_list(ba, Path(tmp) / "ba.txt")
    print(path.read_text().splitlines()[:3])
    back = load_edge_list(path)
    assert back.edge_set() == ba.edge_set()

# Downsample to 500 nodes; cut edges become stubs that are re-paired
small = sample_and_rewire(ba, 500, seed=2)
rw = small.meta["rewire"]
print(f"kept {small.n_edges} edges; {rw['stubs']} stubs, {rw['dropped_stubs']} dropped")
print("degree histogram L1 drift:", rw["degree_histogram_l1"])
print("mean degree before/after:", round(ba.degree.mean(), 2), round(float(np.mean(small.degree)), 2))
