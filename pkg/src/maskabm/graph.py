"""Contact networks: construction, loading, downsampling and validation.

A :class:`ContactGraph` is an undirected weighted graph whose edge weights are
daily transmission probabilities (before calibration they are only a
scaffold). Node ids are always dense integers ``0..n-1`` so per-agent arrays
index directly.
"""

from __future__ import annotations

import itertools
import logging
from collections import Counter, deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import networkx as nx
import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError, EdgeListParseError
from .rng import as_generator

log = logging.getLogger(__name__)

__all__ = [
    "ContactGraph",
    "generate_barabasi_albert",
    "generate_uniform_random",
    "load_edge_list",
    "write_edge_list",
    "sample_and_rewire",
    "degree_histogram",
    "histogram_l1",
    "mixing_matrix",
]

ATTRIBUTE_BLOCK = "%nodes"


@dataclass(frozen=True, eq=False)
class ContactGraph:
    """Immutable undirected weighted graph.

    Edges are stored once each with ``u < v``. ``meta`` carries provenance
    and diagnostics (e.g. rewiring statistics); ``node_attrs`` holds optional
    per-node attributes read from an edge-list file.
    """

    n_nodes: int
    u: np.ndarray
    v: np.ndarray
    weight: np.ndarray
    meta: dict = field(default_factory=dict)
    node_attrs: dict | None = None

    def __post_init__(self):
        u = np.asarray(self.u, dtype=np.int64).ravel()
        v = np.asarray(self.v, dtype=np.int64).ravel()
        w = np.asarray(self.weight, dtype=np.float64).ravel()
        if not (len(u) == len(v) == len(w)):
            raise ConfigurationError("edge arrays must have equal length")
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        order = np.lexsort((hi, lo))
        lo, hi, w = lo[order], hi[order], w[order]
        for name, arr in (("u", lo), ("v", hi), ("weight", w)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "n_nodes", int(self.n_nodes))
        self.validate()

    def validate(self):
        n, u, v, w = self.n_nodes, self.u, self.v, self.weight
        if n < 0:
            raise ConfigurationError("n_nodes must be nonnegative")
        if len(u) == 0:
            return
        if u.min() < 0 or v.max() >= n:
            raise ConfigurationError("edge endpoint outside 0..n_nodes-1")
        if np.any(u == v):
            raise ConfigurationError("self-loop present")
        if np.any((u[1:] == u[:-1]) & (v[1:] == v[:-1])):
            raise ConfigurationError("duplicate edge present")
        if not np.all((w > 0) & (w <= 1)) or not np.all(np.isfinite(w)):
            raise ConfigurationError("edge weights must lie in (0, 1]")

    @property
    def n_edges(self) -> int:
        return len(self.u)

    @property
    def edges(self) -> list[tuple[int, int, float]]:
        return list(zip(self.u.tolist(), self.v.tolist(), self.weight.tolist()))

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric CSR matrix of edge weights."""
        n = self.n_nodes
        rows = np.concatenate([self.u, self.v])
        cols = np.concatenate([self.v, self.u])
        data = np.concatenate([self.weight, self.weight])
        return sp.csr_matrix((data, (rows, cols)), shape=(n, n))

    @cached_property
    def indicator(self) -> sp.csr_matrix:
        """Unweighted 0/1 adjacency, used for neighbor counts."""
        a = self.adjacency.copy()
        a.data[:] = 1.0
        return a

    @cached_property
    def degree(self) -> np.ndarray:
        d = np.bincount(self.u, minlength=self.n_nodes) + np.bincount(
            self.v, minlength=self.n_nodes
        )
        d.setflags(write=False)
        return d

    def neighbors(self, i: int) -> np.ndarray:
        a = self.adjacency
        return a.indices[a.indptr[i] : a.indptr[i + 1]]

    def edge_set(self) -> set[tuple[int, int]]:
        return set(zip(self.u.tolist(), self.v.tolist()))

    def with_weights(self, weight, **meta) -> "ContactGraph":
        """Copy with the same topology and new edge weights."""
        return ContactGraph(
            self.n_nodes, self.u, self.v, weight, {**self.meta, **meta}, self.node_attrs
        )

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n_nodes))
        g.add_weighted_edges_from(self.edges)
        return g

    @classmethod
    def from_edges(cls, n_nodes, edges, meta=None, node_attrs=None):
        edges = list(edges)
        if edges and len(edges[0]) == 2:
            edges = [(a, b, 1.0) for a, b in edges]
        arr = np.array(edges, dtype=np.float64).reshape(-1, 3)
        return cls(n_nodes, arr[:, 0], arr[:, 1], arr[:, 2], dict(meta or {}), node_attrs)


def degree_histogram(degrees) -> dict[int, int]:
    """Map each degree to the number of nodes that have it."""
    return dict(sorted(Counter(np.asarray(degrees).tolist()).items()))


def histogram_l1(h1: dict, h2: dict) -> int:
    keys = set(h1) | set(h2)
    return int(sum(abs(h1.get(k, 0) - h2.get(k, 0)) for k in keys))


def generate_barabasi_albert(n: int, target_edges: int, seed) -> ContactGraph:
    """Preferential-attachment graph with roughly ``target_edges`` edges.

    Each new node attaches to ``m = round(target_edges / n)`` existing nodes,
    giving ``(n - m) * m`` edges, within ``n`` of the target.
    """
    if n < 3:
        raise ConfigurationError(f"Barabasi-Albert graph needs n >= 3, got {n}")
    m = int(round(target_edges / n))
    if m < 1 or m >= n:
        raise ConfigurationError(
            f"target_edges={target_edges} gives attachment parameter m={m}; need 1 <= m < n={n}"
        )
    rng = as_generator(seed)
    nxg = nx.barabasi_albert_graph(n, m, seed=int(rng.integers(2**31 - 1)))
    edges = np.array(nxg.edges(), dtype=np.int64).reshape(-1, 2)
    return ContactGraph(
        n,
        edges[:, 0],
        edges[:, 1],
        np.ones(len(edges)),
        {"generator": "barabasi_albert", "m": m},
    )


def _decode_pairs(k: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    # row i owns pair indices [off_i, off_i + n - 1 - i)
    i_all = np.arange(n, dtype=np.int64)
    offsets = i_all * n - i_all * (i_all + 1) // 2
    i = np.searchsorted(offsets, k, side="right") - 1
    j = k - offsets[i] + i + 1
    return i, j


def generate_uniform_random(n: int, m: int, seed) -> ContactGraph:
    """Exactly ``m`` distinct edges drawn uniformly without replacement."""
    total = n * (n - 1) // 2
    if m < 0 or m > total:
        raise ConfigurationError(f"cannot place m={m} edges on n={n} nodes (max {total})")
    rng = as_generator(seed)
    k = np.sort(rng.choice(total, size=m, replace=False)) if m else np.zeros(0, np.int64)
    i, j = _decode_pairs(np.asarray(k, dtype=np.int64), n)
    return ContactGraph(n, i, j, np.ones(m), {"generator": "uniform_random"})


def load_edge_list(path, attributes: bool = False) -> ContactGraph:
    """Read a whitespace-separated ``u v weight`` edge list.

    Lines starting with ``#`` are comments, except a ``# n_nodes: N`` header,
    which declares the node count when ids are already dense (keeps isolated
    nodes across a round trip). A line ``%nodes`` starts a per-node attribute
    block of ``id key=value ...`` lines; it is skipped unless ``attributes``
    is true. Node ids are otherwise compacted to ``0..n-1`` in sorted order.
    """
    declared_n = None
    raw: list[tuple[str, str, float, int]] = []
    attrs: dict[str, dict[str, str]] = {}
    in_block = False
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            if text.startswith("#"):
                body = text[1:].strip()
                if body.lower().startswith("n_nodes:"):
                    try:
                        declared_n = int(body.split(":", 1)[1])
                    except ValueError:
                        raise EdgeListParseError("bad n_nodes header", lineno) from None
                continue
            if text == ATTRIBUTE_BLOCK:
                in_block = True
                continue
            if in_block:
                if attributes:
                    node, *pairs = text.split()
                    try:
                        attrs[node] = dict(p.split("=", 1) for p in pairs)
                    except ValueError:
                        raise EdgeListParseError(f"malformed attribute line {text!r}", lineno) from None
                continue
            parts = text.split()
            if len(parts) != 3:
                raise EdgeListParseError(f"expected 'u v weight', got {text!r}", lineno)
            a, b, wtext = parts
            try:
                w = float(wtext)
            except ValueError:
                raise EdgeListParseError(f"weight {wtext!r} is not a number", lineno) from None
            if not (0.0 < w <= 1.0):
                raise EdgeListParseError(f"weight {w} outside (0, 1]", lineno)
            if a == b:
                raise EdgeListParseError(f"self-loop on node {a}", lineno)
            raw.append((a, b, w, lineno))

    ids = {x for a, b, _, _ in raw for x in (a, b)} | set(attrs)
    dense = all(s.lstrip("-").isdigit() for s in ids)
    if declared_n is not None and dense and all(0 <= int(s) < declared_n for s in ids):
        index = {s: int(s) for s in ids}
        n = declared_n
    else:
        key = (lambda s: (0, int(s), s)) if dense else (lambda s: (1, 0, s))
        index = {s: i for i, s in enumerate(sorted(ids, key=key))}
        n = len(index)

    seen: dict[tuple[int, int], int] = {}
    u, v, w = [], [], []
    for a, b, wt, lineno in raw:
        i, j = sorted((index[a], index[b]))
        if (i, j) in seen:
            raise EdgeListParseError(
                f"duplicate edge {a}-{b} (first seen on line {seen[(i, j)]})", lineno
            )
        seen[(i, j)] = lineno
        u.append(i)
        v.append(j)
        w.append(wt)
    node_attrs = {index[k]: val for k, val in attrs.items()} if attributes and attrs else None
    return ContactGraph(n, u, v, w, {"source": str(path)}, node_attrs)


def write_edge_list(g: ContactGraph, path) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        fh.write(f"# n_nodes: {g.n_nodes}\n")
        for a, b, w in g.edges:
            fh.write(f"{a} {b} {w!r}\n")
        if g.node_attrs:
            fh.write(ATTRIBUTE_BLOCK + "\n")
            for node in sorted(g.node_attrs):
                kv = " ".join(f"{k}={val}" for k, val in g.node_attrs[node].items())
                fh.write(f"{node} {kv}\n")
    return path


def _bfs_clusters(g: ContactGraph, target_n: int, rng: np.random.Generator) -> list[int]:
    """Collect ``target_n`` nodes by growing BFS balls from random roots."""
    a = g.adjacency
    chosen: list[int] = []
    in_sample = np.zeros(g.n_nodes, dtype=bool)
    roots = rng.permutation(g.n_nodes)
    for root in roots:
        if len(chosen) >= target_n:
            break
        if in_sample[root]:
            continue
        queue = deque([int(root)])
        in_sample[root] = True
        chosen.append(int(root))
        while queue and len(chosen) < target_n:
            x = queue.popleft()
            nbrs = a.indices[a.indptr[x] : a.indptr[x + 1]]
            for y in rng.permutation(nbrs):
                if len(chosen) >= target_n:
                    break
                if not in_sample[y]:
                    in_sample[y] = True
                    chosen.append(int(y))
                    queue.append(int(y))
    return chosen


def _pair_stubs(stubs, edges: dict, rng, max_attempts: int = 50) -> tuple[int, int]:
    """Pair ``(node, weight)`` stubs into new edges, adding them to ``edges``.

    Returns ``(dropped_stubs, passes)``.
    """
    if len(stubs) % 2:
        log.info("odd stub count (%d): one stub dropped by parity", len(stubs))
    pending = list(stubs)
    passes = 0
    while len(pending) >= 2 and passes < max_attempts:
        passes += 1
        pending = [pending[k] for k in rng.permutation(len(pending))]
        leftover = [pending.pop()] if len(pending) % 2 else []
        formed = 0
        for (a, wa), (b, wb) in zip(pending[0::2], pending[1::2]):
            key = (min(a, b), max(a, b))
            if a == b or key in edges:
                leftover.extend([(a, wa), (b, wb)])
            else:
                edges[key] = 0.5 * (wa + wb)
                formed += 1
        pending = leftover
        if not formed and _unpairable(pending, edges):
            break
    return len(pending), passes


def _unpairable(stubs, edges) -> bool:
    nodes = sorted({a for a, _ in stubs})
    return not any((a, b) not in edges for a, b in itertools.combinations(nodes, 2))


def sample_and_rewire(
    g: ContactGraph, target_n: int, seed, max_attempts: int = 50
) -> ContactGraph:
    """Downsample ``g`` to ``target_n`` nodes while keeping per-node degree.

    Nodes are gathered in BFS clusters; edges inside the sample are kept and
    every cut edge leaves a stub on its sampled endpoint. Stubs are then
    paired at random (configuration-model style), rejecting self-loops and
    duplicate edges, for at most ``max_attempts`` passes. Leftover stubs are
    dropped. A new edge's weight is the mean of its two stubs' weights.

    Diagnostics land in ``meta["rewire"]``: stub counts, dropped stubs, and
    the L1 distance between the degree histogram the stubs call for and the
    one achieved.
    """
    if target_n >= g.n_nodes:
        raise ConfigurationError(f"target_n={target_n} must be below n_nodes={g.n_nodes}")
    if target_n < 1:
        raise ConfigurationError("target_n must be positive")
    rng = as_generator(seed)
    chosen = _bfs_clusters(g, target_n, rng)
    relabel = np.full(g.n_nodes, -1, dtype=np.int64)
    relabel[np.asarray(chosen)] = np.arange(len(chosen))

    ru, rv = relabel[g.u], relabel[g.v]
    inner = (ru >= 0) & (rv >= 0)
    cut = (ru >= 0) ^ (rv >= 0)
    edges = {(min(a, b), max(a, b)): w for a, b, w in zip(ru[inner].tolist(), rv[inner].tolist(), g.weight[inner].tolist())}

    stub_nodes = np.where(ru[cut] >= 0, ru[cut], rv[cut])
    stub_w = g.weight[cut]
    stubs = list(zip(stub_nodes.tolist(), stub_w.tolist()))
    n_stubs = len(stubs)

    target_degree = np.bincount(np.concatenate([ru[inner], rv[inner]]), minlength=target_n)
    target_degree = target_degree + np.bincount(stub_nodes, minlength=target_n)

    dropped, passes = _pair_stubs(stubs, edges, rng, max_attempts)
    if dropped:
        log.info("dropped %d of %d stubs after %d passes", dropped, n_stubs, passes)

    keys = sorted(edges)
    arr = np.array(keys, dtype=np.int64).reshape(-1, 2)
    out = ContactGraph(target_n, arr[:, 0], arr[:, 1], [edges[k] for k in keys], dict(g.meta))
    h_target = degree_histogram(target_degree)
    h_final = degree_histogram(out.degree)
    out.meta["rewire"] = {
        "method": "bfs_clusters+uniform_stub_pairing",
        "stubs": n_stubs,
        "dropped_stubs": dropped,
        "passes": passes,
        "degree_histogram_l1": histogram_l1(h_target, h_final),
        "source_nodes": g.n_nodes,
    }
    out.meta["original_ids"] = chosen
    return out


def mixing_matrix(g: ContactGraph, attribute: str) -> tuple[list[str], np.ndarray]:
    """Edge-count matrix between categories of a node attribute."""
    if not g.node_attrs:
        raise ConfigurationError("graph has no node attributes")
    labels = np.array([g.node_attrs.get(i, {}).get(attribute, "") for i in range(g.n_nodes)])
    cats = sorted(set(labels.tolist()))
    idx = {c: k for k, c in enumerate(cats)}
    mat = np.zeros((len(cats), len(cats)))
    for a, b in zip(labels[g.u], labels[g.v]):
        mat[idx[a], idx[b]] += 1
        if a != b:
            mat[idx[b], idx[a]] += 1
    return cats, mat
