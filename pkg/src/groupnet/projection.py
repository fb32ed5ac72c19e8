"""One-mode projection of an agent x group membership."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import UndirectedGraph
from .groups import BipartiteMembership


@dataclass(frozen=True)
class WeightedProjection:
    """Co-membership counts; diagonal holds each agent's membership count."""

    weights: np.ndarray

    @property
    def agent_count(self) -> int:
        return self.weights.shape[0]


def project(b: BipartiteMembership) -> WeightedProjection:
    inc = b.incidence.astype(np.int64)
    return WeightedProjection(inc @ inc.T)


def unweighted_projection(b: BipartiteMembership) -> UndirectedGraph:
    """Edge between two agents iff they share at least one group."""
    w = project(b).weights
    adj = w >= 1
    np.fill_diagonal(adj, False)
    return UndirectedGraph.from_adjacency(adj, labels=b.agent_labels)
