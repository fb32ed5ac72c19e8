"""Observed groups synthesized from a ground-truth network.

Team-formation model: each group starts from a maximal clique drawn
uniformly at random; every clique slot keeps its member with probability
``p_clique`` and is otherwise filled by an outsider. Groups are i.i.d.

``noise="per_group"`` switches to a coarser alternative: with probability
``p_clique`` the group is exactly its source clique, otherwise it is a
uniformly random set of the same size drawn from all nodes.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .graph import UndirectedGraph, maximal_cliques

REPLACEMENT_POOLS = ("outside_clique", "any")
NOISE_MODELS = ("per_slot", "per_group")


class GroupGenerationError(ValueError):
    pass


@dataclass(frozen=True)
class GroupGenSpec:
    num_groups: int
    p_clique: float
    min_clique_size: int = 2
    # "outside_clique": outsiders come from nodes not in the source clique.
    # "any": outsiders come from any node not already kept in the group.
    replacement: str = "outside_clique"
    noise: str = "per_slot"

    def __post_init__(self):
        if self.num_groups < 1:
            raise ValueError("num_groups must be >= 1")
        if not 0.0 <= self.p_clique <= 1.0:
            raise ValueError("p_clique must lie in [0, 1]")
        if self.min_clique_size < 1:
            raise ValueError("min_clique_size must be >= 1")
        if self.replacement not in REPLACEMENT_POOLS:
            raise ValueError(f"replacement must be one of {REPLACEMENT_POOLS}")
        if self.noise not in NOISE_MODELS:
            raise ValueError(f"noise must be one of {NOISE_MODELS}")


@dataclass(frozen=True)
class BipartiteMembership:
    """Agent x group incidence (boolean, shape N x G)."""

    incidence: np.ndarray
    agent_labels: tuple | None = field(default=None, compare=False, repr=False)
    group_labels: tuple | None = field(default=None, compare=False, repr=False)
    # groups whose outsider pool ran dry and kept clique members instead
    pool_exhausted: int = field(default=0, compare=False)
    source_cliques: tuple | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        inc = np.asarray(self.incidence).astype(bool)
        if inc.ndim != 2:
            raise ValueError("incidence must be a 2-d agent x group matrix")
        inc.flags.writeable = False
        object.__setattr__(self, "incidence", inc)

    @property
    def agent_count(self) -> int:
        return self.incidence.shape[0]

    @property
    def group_count(self) -> int:
        return self.incidence.shape[1]

    def row_sums(self) -> np.ndarray:
        return self.incidence.sum(axis=1)

    def col_sums(self) -> np.ndarray:
        return self.incidence.sum(axis=0)

    def groups(self) -> list[tuple[int, ...]]:
        return [tuple(np.flatnonzero(col).tolist()) for col in self.incidence.T]

    @classmethod
    def from_groups(cls, n_agents: int, groups) -> "BipartiteMembership":
        inc = np.zeros((n_agents, len(groups)), dtype=bool)
        for k, members in enumerate(groups):
            inc[list(members), k] = True
        return cls(inc)


def generate_groups(g: UndirectedGraph, spec: GroupGenSpec, rng: np.random.Generator,
                    cliques=None) -> BipartiteMembership:
    """Draw ``spec.num_groups`` observed groups from the cliques of ``g``.

    ``cliques`` may carry a precomputed maximal-clique list for ``g``.
    Every group has exactly as many members as its source clique.
    """
    if cliques is None:
        cliques = maximal_cliques(g)
    pool = [c for c in cliques if len(c) >= spec.min_clique_size]
    if not pool:
        raise GroupGenerationError(
            f"no maximal clique of size >= {spec.min_clique_size} to draw groups from")
    n, n_groups = g.node_count, spec.num_groups
    sizes = np.array([len(c) for c in pool])
    kmax = int(sizes.max())
    padded = np.zeros((len(pool), kmax), dtype=np.intp)
    for i, c in enumerate(pool):
        padded[i, : len(c)] = c

    choice = rng.integers(len(pool), size=n_groups)
    slots = padded[choice]
    size = sizes[choice]
    valid = np.arange(kmax) < size[:, None]
    rows = np.broadcast_to(np.arange(n_groups)[:, None], slots.shape)
    if spec.noise == "per_group":
        return _per_group(n, spec.p_clique, slots, size, valid, rows, rng,
                          tuple(pool[i] for i in choice.tolist()))
    keep = (rng.random((n_groups, kmax)) < spec.p_clique) & valid
    n_replace = size - keep.sum(axis=1)

    in_clique = np.zeros((n_groups, n), dtype=bool)
    in_clique[rows[valid], slots[valid]] = True
    kept = np.zeros((n_groups, n), dtype=bool)
    kept[rows[keep], slots[keep]] = True
    excluded = in_clique if spec.replacement == "outside_clique" else kept.copy()

    keys = rng.random((n_groups, n))
    keys[excluded] = np.inf
    pool_size = n - excluded.sum(axis=1)
    n_draw = np.minimum(n_replace, pool_size)

    short = np.flatnonzero(n_draw < n_replace)
    for r in short:
        # not enough outsiders: re-keep dropped clique members in slot order
        dropped = np.flatnonzero(valid[r] & ~keep[r])[: n_replace[r] - n_draw[r]]
        kept[r, slots[r, dropped]] = True

    order = np.argsort(keys, axis=1, kind="stable")[:, :kmax]
    take = np.arange(kmax) < n_draw[:, None]
    chosen = kept.copy()
    chosen[rows[take], order[take]] = True

    return BipartiteMembership(
        chosen.T.copy(),
        pool_exhausted=len(short),
        source_cliques=tuple(pool[i] for i in choice.tolist()),
    )


def _per_group(n, p, slots, size, valid, rows, rng, sources) -> BipartiteMembership:
    n_groups, kmax = slots.shape
    intact = rng.random(n_groups) < p
    order = np.argsort(rng.random((n_groups, n)), axis=1)[:, :kmax]
    members = np.where(intact[:, None], slots, order)
    chosen = np.zeros((n_groups, n), dtype=bool)
    chosen[rows[valid], members[valid]] = True
    return BipartiteMembership(chosen.T.copy(), source_cliques=sources)


def membership_stats(b: BipartiteMembership) -> tuple[float, float]:
    """(mean group size, mean memberships per agent)."""
    total = float(b.incidence.sum())
    mean_size = total / b.group_count if b.group_count else 0.0
    mean_memb = total / b.agent_count if b.agent_count else 0.0
    return mean_size, mean_memb


def write_membership_csv(b: BipartiteMembership) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["agent", "group"])
    agents = b.agent_labels or tuple(str(i) for i in range(b.agent_count))
    groups = b.group_labels or tuple(f"g{k}" for k in range(b.group_count))
    for k in range(b.group_count):
        for i in np.flatnonzero(b.incidence[:, k]):
            w.writerow([agents[i], groups[k]])
    return buf.getvalue()


def read_membership_csv(text: str, n_agents: int | None = None,
                        agent_labels=None) -> BipartiteMembership:
    """Parse an ``agent,group`` CSV.

    Labels map to indices by first appearance. ``agent_labels`` fixes the
    agent index order up front (agents that never appear stay as empty rows).
    """
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["agent", "group"]:
        raise ValueError("membership CSV must start with header 'agent,group'")
    agents: dict[str, int] = {}
    if agent_labels is not None:
        agents = {str(a): i for i, a in enumerate(agent_labels)}
    groups: dict[str, int] = {}
    pairs = set()
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise ValueError(f"line {lineno}: expected 2 fields, got {len(row)}")
        a, gname = row[0].strip(), row[1].strip()
        if a not in agents:
            if agent_labels is not None:
                raise ValueError(f"line {lineno}: unknown agent {a!r}")
            agents[a] = len(agents)
        if gname not in groups:
            groups[gname] = len(groups)
        pairs.add((agents[a], groups[gname]))
    n = max(len(agents), n_agents or 0)
    labels = list(agents) + [str(i) for i in range(len(agents), n)]
    inc = np.zeros((n, len(groups)), dtype=bool)
    for i, k in pairs:
        inc[i, k] = True
    return BipartiteMembership(inc, tuple(labels), tuple(groups))
