"""Ground-truth networks: five synthetic models and bundled empirical data.

Synthetic generators take a ``numpy.random.Generator`` and are pure functions
of it. Empirical networks are read from edge-list files listed in
``data/manifest.csv``; set ``GROUPNET_DATA_DIR`` to point at a directory
with its own manifest to override or extend the bundled set.
"""

from __future__ import annotations

import csv
import hashlib
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import GraphError, UndirectedGraph, load_edge_list

SYNTHETIC_KINDS = ("random", "small_world", "scale_free", "caveman", "core_periphery")
EMPIRICAL_KINDS = ("dolphin", "florentine", "karate", "law", "tailor")
ALL_KINDS = SYNTHETIC_KINDS + EMPIRICAL_KINDS

# 50 nodes and roughly 100 edges each
DEFAULT_PARAMS = {
    "random": {"n": 50, "p": 0.08},
    "small_world": {"n": 50, "k": 4, "beta": 0.05},
    "scale_free": {"n": 50, "m": 2},
    "caveman": {"n_cliques": 10, "clique_size": 5, "connected": False},
    "core_periphery": {"core_n": 10, "periph_n": 40, "core_density": 0.85},
}

_REQUIRED = {
    "random": ("n", "p"),
    "small_world": ("n", "k", "beta"),
    "scale_free": ("n", "m"),
    "caveman": ("n_cliques", "clique_size"),
    "core_periphery": ("core_n", "periph_n", "core_density"),
}

ENV_DATA_DIR = "GROUPNET_DATA_DIR"
BUNDLED_DATA_DIR = Path(__file__).with_name("data")


class DatasetError(RuntimeError):
    """A bundled or user-supplied empirical network is missing or corrupt."""


@dataclass(frozen=True)
class NetworkSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise ValueError(f"unknown network kind {self.kind!r}")
        if self.kind in EMPIRICAL_KINDS:
            if self.params:
                raise ValueError(f"empirical network {self.kind!r} takes no parameters")
            return
        missing = [k for k in _REQUIRED[self.kind] if k not in self.params]
        if missing:
            raise ValueError(f"{self.kind}: missing parameters {missing}")
        for key in ("p", "beta", "core_density"):
            if key in self.params and not 0.0 <= self.params[key] <= 1.0:
                raise ValueError(f"{self.kind}: {key} must lie in [0, 1]")

    @classmethod
    def default(cls, kind: str) -> "NetworkSpec":
        return cls(kind, dict(DEFAULT_PARAMS.get(kind, {})))

    @property
    def is_empirical(self) -> bool:
        return self.kind in EMPIRICAL_KINDS

    def build(self, rng: np.random.Generator | None = None, data_dir=None) -> UndirectedGraph:
        p = self.params
        if self.kind == "random":
            return gen_random(p["n"], p["p"], rng)
        if self.kind == "small_world":
            return gen_small_world(p["n"], p["k"], p["beta"], rng)
        if self.kind == "scale_free":
            return gen_scale_free(p["n"], p["m"], rng)
        if self.kind == "caveman":
            return gen_caveman(p["n_cliques"], p["clique_size"], p.get("connected", False))
        if self.kind == "core_periphery":
            return gen_core_periphery(p["core_n"], p["periph_n"], p["core_density"], rng)
        return load_empirical(self.kind, data_dir)


def gen_random(n: int, p: float, rng: np.random.Generator) -> UndirectedGraph:
    """Erdos-Renyi G(n, p)."""
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < p
    return UndirectedGraph(n, frozenset(zip(iu[keep].tolist(), ju[keep].tolist())))


def gen_small_world(n: int, k: int, beta: float, rng: np.random.Generator) -> UndirectedGraph:
    """Watts-Strogatz: ring lattice of degree k, each edge rewired w.p. beta.

    A rewired edge keeps its first endpoint and moves its second to a uniform
    node that is neither the endpoint itself nor already adjacent to it, so
    the edge count stays at n*k/2.
    """
    if not (n > k and k % 2 == 0):
        raise ValueError("small world needs n > k and k even")
    nbr = [set() for _ in range(n)]
    for u in range(n):
        for j in range(1, k // 2 + 1):
            v = (u + j) % n
            nbr[u].add(v)
            nbr[v].add(u)
    for j in range(1, k // 2 + 1):
        for u in range(n):
            v = (u + j) % n
            if rng.random() >= beta or v not in nbr[u]:
                continue
            if len(nbr[u]) >= n - 1:
                continue
            candidates = [w for w in range(n) if w != u and w not in nbr[u]]
            w = candidates[rng.integers(len(candidates))]
            nbr[u].discard(v)
            nbr[v].discard(u)
            nbr[u].add(w)
            nbr[w].add(u)
    return UndirectedGraph(n, frozenset((u, v) for u in range(n) for v in nbr[u] if u < v))


def gen_scale_free(n: int, m: int, rng: np.random.Generator) -> UndirectedGraph:
    """Preferential attachment grown from a complete seed on m+1 nodes.

    Each arriving node links to m distinct existing nodes drawn with
    probability proportional to their current degree.
    """
    if not n > m >= 1:
        raise ValueError("scale free needs n > m >= 1")
    m0 = m + 1
    edges = {(u, v) for u in range(m0) for v in range(u + 1, m0)}
    # each node appears once per incident edge end
    ends = [u for e in edges for u in e]
    for new in range(m0, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(ends[rng.integers(len(ends))])
        for t in sorted(targets):
            edges.add((t, new))
            ends.extend((t, new))
    return UndirectedGraph(n, frozenset(edges))


def gen_caveman(n_cliques: int, clique_size: int, connected: bool = False) -> UndirectedGraph:
    """Disjoint union of complete graphs; ``connected`` relinks them into a ring.

    The connected variant drops edge (s, s+1) inside each cave starting at s
    and adds (s, s-1) into the previous cave, keeping the edge count.
    """
    if n_cliques < 1 or clique_size < 2:
        raise ValueError("caveman needs n_cliques >= 1 and clique_size >= 2")
    n = n_cliques * clique_size
    edges = set()
    for c in range(n_cliques):
        s = c * clique_size
        for u in range(s, s + clique_size):
            for v in range(u + 1, s + clique_size):
                edges.add((u, v))
    if connected and n_cliques > 1:
        for c in range(n_cliques):
            s = c * clique_size
            edges.discard((s, s + 1))
            prev = (s - 1) % n
            edges.add((min(s, prev), max(s, prev)))
    return UndirectedGraph(n, frozenset(edges))


def gen_core_periphery(core_n: int, periph_n: int, core_density: float,
                       rng: np.random.Generator) -> UndirectedGraph:
    """Dense random core; each periphery node ties to 1 or 2 core nodes (even odds)."""
    if core_n < 2 or periph_n < 0:
        raise ValueError("core periphery needs core_n >= 2 and periph_n >= 0")
    iu, ju = np.triu_indices(core_n, 1)
    keep = rng.random(iu.size) < core_density
    edges = set(zip(iu[keep].tolist(), ju[keep].tolist()))
    for v in range(core_n, core_n + periph_n):
        k = 1 + int(rng.random() < 0.5)
        for c in rng.choice(core_n, size=k, replace=False):
            edges.add((int(c), v))
    return UndirectedGraph(core_n + periph_n, frozenset(edges))


def data_dir() -> Path:
    env = os.environ.get(ENV_DATA_DIR)
    return Path(env) if env else BUNDLED_DATA_DIR


def read_manifest(directory=None) -> dict[str, dict]:
    directory = Path(directory) if directory is not None else data_dir()
    path = directory / "manifest.csv"
    if not path.exists():
        raise DatasetError(f"no manifest.csv in {directory}")
    with open(path, newline="") as fh:
        return {row["name"]: row for row in csv.DictReader(fh)}


def load_empirical(kind: str, directory=None) -> UndirectedGraph:
    if kind not in EMPIRICAL_KINDS:
        raise ValueError(f"{kind!r} is not an empirical network")
    directory = Path(directory) if directory is not None else data_dir()
    manifest = read_manifest(directory)
    if kind not in manifest:
        raise DatasetError(
            f"dataset {kind!r} is not available in {directory}; add its edge list "
            f"and a manifest row, and point {ENV_DATA_DIR} at that directory")
    entry = manifest[kind]
    path = directory / entry["file"]
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise DatasetError(f"dataset {kind!r}: cannot read {path}: {exc}") from exc
    if entry.get("sha256") and hashlib.sha256(raw).hexdigest() != entry["sha256"]:
        raise DatasetError(f"dataset {kind!r}: checksum mismatch for {path}")
    try:
        g = load_edge_list(raw.decode("utf-8"))
    except (GraphError, UnicodeDecodeError) as exc:
        raise DatasetError(f"dataset {kind!r}: {exc}") from exc
    if g.node_count != int(entry["nodes"]) or g.n_edges != int(entry["edges"]):
        raise DatasetError(
            f"dataset {kind!r}: read {g.node_count} nodes / {g.n_edges} edges, "
            f"manifest says {entry['nodes']} / {entry['edges']}")
    return g


def available_empirical(directory=None) -> list[str]:
    try:
        names = read_manifest(directory)
    except DatasetError:
        return []
    return [k for k in EMPIRICAL_KINDS if k in names]
