"""Power domination: S observes G when its closed neighborhood is zero forcing."""

from __future__ import annotations

import logging
from math import ceil

import numpy as np

from butterfly.core.errors import DomainError
from butterfly.core.models import PDReport, SearchResult
from butterfly.utils.forcing import (
    SearchBudget,
    is_zero_forcing,
    propagation_time,
    search_min_size,
    size_formula,
)
from butterfly.utils.graph import Graph, VertexSet, closed_neighborhood, max_degree
from butterfly.utils.linalg import ExactMatrix, FieldTag, rank

logger = logging.getLogger(__name__)


def is_power_dominating(g: Graph, s: VertexSet) -> bool:
    return is_zero_forcing(g, closed_neighborhood(g, s))


def pd_report(g: Graph, s: VertexSet) -> PDReport:
    """Status of ``s`` with ppt(S) = 1 + pt(N[S]) when it power dominates."""
    pt = propagation_time(g, closed_neighborhood(g, s))
    return PDReport(
        set=list(s.ids()),
        is_power_dominating=pt is not None,
        pt_of_closed_nbhd=pt,
        ppt_candidate=None if pt is None else pt + 1,
    )


def butterfly_max_degree(r: int) -> int:
    """4 for r >= 2; BF(1) is a 4-cycle."""
    if r < 1:
        raise DomainError(f"butterfly order must be positive, got r={r}")
    return 2 if r == 1 else 4


def pd_lower_bound(r: int) -> int:
    """ceil(Z(BF(r)) / max degree), from gamma_P(G) >= Z(G) / Delta(G)."""
    return ceil(size_formula(r) / butterfly_max_degree(r))


def graph_pd_lower_bound(g: Graph) -> int:
    """ceil((n - rank_GF(2)(A)) / max degree); an edgeless graph needs every vertex."""
    if g.n == 0:
        return 0
    delta = max_degree(g)
    if delta == 0:
        return g.n
    corank = g.n - rank(ExactMatrix.from_graph(g, FieldTag.prime(2)))
    return max(1, ceil(corank / delta))


def brute_force_pd(
    g: Graph,
    max_candidates: int | None = None,
    max_seconds: float | None = None,
    lower_bound: int | None = None,
) -> SearchResult:
    """Minimum power dominating set by exhaustive search (exploratory, small graphs).

    Every minimum witness is collected; ``witness`` is the lexicographically
    smallest and ``ppt`` the least power propagation time among them.
    The search starts at ``lower_bound``, by default ``graph_pd_lower_bound(g)``;
    for BF(r) pass ``pd_lower_bound(r)``.
    """
    if lower_bound is None:
        lower_bound = graph_pd_lower_bound(g)
    budget = SearchBudget(max_candidates, max_seconds)

    def accept(chosen: tuple[int, ...]) -> bool:
        mask = np.zeros(g.n, dtype=bool)
        mask[list(chosen)] = True
        return is_power_dominating(g, VertexSet(g.n, mask))

    size, found = search_min_size(g, lower_bound, budget, accept, collect_all=True)
    ppt = min(pd_report(g, VertexSet.from_ids(g.n, w)).ppt_candidate for w in found)
    logger.info("power domination number %d, %d minimum sets, ppt %d", size, len(found), ppt)
    return SearchResult(
        value=size,
        witness=list(found[0]),
        lower_bound=lower_bound,
        candidates_checked=budget.used,
        elapsed_seconds=budget.elapsed,
        minimum_witnesses=len(found),
        ppt=ppt,
        status="exploratory",
    )
