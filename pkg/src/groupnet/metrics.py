"""Dyad-level agreement between a true and an inferred network.

Scores that are undefined for a given confusion table (for example the
correlation when the inferred network is empty) come back as ``nan``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import UndirectedGraph


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class SimilarityScores:
    correlation: float
    kappa: float
    jaccard: float


def confusion(truth: UndirectedGraph, inferred: UndirectedGraph) -> ConfusionCounts:
    if truth.node_count != inferred.node_count:
        raise ValueError(
            f"node counts differ: truth {truth.node_count}, inferred {inferred.node_count}")
    n = truth.node_count
    tp = len(truth.edges & inferred.edges)
    fp = inferred.n_edges - tp
    fn = truth.n_edges - tp
    tn = n * (n - 1) // 2 - tp - fp - fn
    return ConfusionCounts(tp, fp, fn, tn)


def scores(c: ConfusionCounts) -> SimilarityScores:
    tp, fp, fn, tn = c.tp, c.fp, c.fn, c.tn
    total = c.total
    prod = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    # Python ints keep the numerator and product exact
    corr = (tp * tn - fp * fn) / math.sqrt(prod) if prod else math.nan
    if total:
        po = (tp + tn) / total
        pe = ((tp + fp) * (tp + fn) + (tn + fn) * (tn + fp)) / total**2
        kappa = (po - pe) / (1.0 - pe) if pe != 1 else math.nan
    else:
        kappa = math.nan
    denom = tp + fp + fn
    jac = tp / denom if denom else math.nan
    return SimilarityScores(corr, kappa, jac)


def similarity(truth: UndirectedGraph, inferred: UndirectedGraph) -> SimilarityScores:
    return scores(confusion(truth, inferred))


def indicator_correlation(truth: UndirectedGraph, inferred: UndirectedGraph) -> float:
    """Pearson correlation of the two dyad indicator vectors (nan if either is constant)."""
    x = truth.edge_indicator().astype(float)
    y = inferred.edge_indicator().astype(float)
    if x.size == 0 or x.std() == 0 or y.std() == 0:
        return math.nan
    return float(np.corrcoef(x, y)[0, 1])
