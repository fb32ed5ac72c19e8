"""Inferring unobserved networks from observed group memberships."""

__version__ = "0.1.0"

from .graph import UndirectedGraph, density, maximal_cliques, transitivity  # noqa: E402
from .groups import BipartiteMembership, GroupGenSpec, generate_groups  # noqa: E402
from .projection import project, unweighted_projection  # noqa: E402
from .sdsm import SdsmConfig, fit_null_model, sdsm_backbone  # noqa: E402
from .metrics import confusion, scores, similarity  # noqa: E402

__all__ = [
    "UndirectedGraph", "density", "maximal_cliques", "transitivity",
    "BipartiteMembership", "GroupGenSpec", "generate_groups",
    "project", "unweighted_projection",
    "SdsmConfig", "fit_null_model", "sdsm_backbone",
    "confusion", "scores", "similarity",
]
