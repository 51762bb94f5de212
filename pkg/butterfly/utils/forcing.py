"""Zero forcing: closure, propagation time, the Jacobsthal sets S^(r) and exact search."""

from __future__ import annotations

import logging
import random
import time
from itertools import combinations
from typing import Literal, Sequence

import numpy as np

from butterfly.core.errors import DomainError, ResourceLimitError
from butterfly.core.models import ForcingRound, ForcingTrace, SearchResult
from butterfly.utils.graph import Graph, VertexSet
from butterfly.utils.linalg import ExactMatrix, FieldTag, rank
from butterfly.utils.network import ButterflyNetwork, vertex_count

logger = logging.getLogger(__name__)


class JacobsthalTable:
    """Cached J_0, J_1, ... with J_n = J_{n-1} + 2 J_{n-2}."""

    def __init__(self) -> None:
        self.values: list[int] = [0, 1]

    def __getitem__(self, n: int) -> int:
        if n < 0:
            raise DomainError(f"J_n is undefined for n={n}")
        while len(self.values) <= n:
            self.values.append(self.values[-1] + 2 * self.values[-2])
        return self.values[n]

    def identity_holds(self) -> bool:
        """J_{n+2} = 2**n + J_n for every cached n."""
        return all(self.values[n + 2] == 2**n + self.values[n] for n in range(len(self.values) - 2))


_JACOBSTHAL = JacobsthalTable()


def jacobsthal(n: int) -> int:
    return _JACOBSTHAL[n]


# ---------------------------------------------------------------------------
# closure


def _forcing_rounds(g: Graph, colored: np.ndarray) -> list[list[tuple[int, int]]]:
    """Run simultaneous rounds in place on ``colored``; returns the forces of each round."""
    adjacency = g.adjacency
    uncolored = np.fromiter(
        (sum(1 for u in nbrs if not colored[u]) for nbrs in adjacency), dtype=np.int64, count=g.n
    )
    rounds: list[list[tuple[int, int]]] = []
    while True:
        forces: list[tuple[int, int]] = []
        targets: set[int] = set()
        for v in np.flatnonzero(colored & (uncolored == 1)).tolist():
            w = next(u for u in adjacency[v] if not colored[u])
            if w not in targets:
                targets.add(w)
                forces.append((v, w))
        if not forces:
            return rounds
        for w in targets:
            colored[w] = True
            for u in adjacency[w]:
                uncolored[u] -= 1
        rounds.append(forces)


def _checked(g: Graph, s: VertexSet) -> None:
    if s.n != g.n:
        raise DomainError(f"vertex set over {s.n} vertices used with a graph on {g.n}")


def closure(g: Graph, s: VertexSet) -> ForcingTrace:
    """Apply every available force simultaneously, round after round, until none applies."""
    _checked(g, s)
    colored = s.mask.copy()
    snapshots: list[ForcingRound] = []
    work = colored.copy()
    for forces in _forcing_rounds(g, work):
        for _, w in forces:
            colored[w] = True
        snapshots.append(ForcingRound(forces=forces, colored=np.flatnonzero(colored).tolist()))
    forcing = bool(colored.all())
    return ForcingTrace(
        initial=list(s.ids()),
        rounds=snapshots,
        final=np.flatnonzero(colored).tolist(),
        pt=len(snapshots) if forcing else None,
        forcing=forcing,
    )


def closure_set(g: Graph, s: VertexSet) -> VertexSet:
    _checked(g, s)
    colored = s.mask.copy()
    _forcing_rounds(g, colored)
    return VertexSet(g.n, colored)


def sequential_closure(g: Graph, s: VertexSet, rng: random.Random | None = None) -> VertexSet:
    """One force at a time; with ``rng`` the next force is picked at random."""
    _checked(g, s)
    colored = s.mask.copy()
    while True:
        available = []
        for v in np.flatnonzero(colored).tolist():
            outside = [u for u in g.adjacency[v] if not colored[u]]
            if len(outside) == 1:
                available.append(outside[0])
        if not available:
            return VertexSet(g.n, colored)
        colored[rng.choice(available) if rng else available[0]] = True


def is_zero_forcing(g: Graph, s: VertexSet) -> bool:
    return bool(closure_set(g, s).mask.all())


def propagation_time(g: Graph, s: VertexSet) -> int | None:
    """pt(S), or None when S is not zero forcing."""
    _checked(g, s)
    colored = s.mask.copy()
    rounds = _forcing_rounds(g, colored)
    return len(rounds) if colored.all() else None


# ---------------------------------------------------------------------------
# S^(r)


def s_intervals(r: int, i: int):
    """Inclusive x-intervals of S^(r) on level i, generated lazily."""
    if not 0 <= i <= r:
        raise DomainError(f"level {i} is outside [0, {r}]")
    if i == r:
        yield 0, jacobsthal(r + 1) - 1
        return
    period = 2 ** (i + 1)
    length = jacobsthal(i + 1)
    for ell in range(2 ** (r - i - 1)):
        yield period * ell, period * ell + length - 1


def s_level_count(r: int, i: int) -> int:
    if i == r:
        return jacobsthal(r + 1)
    return 2 ** (r - i - 1) * jacobsthal(i + 1)


def s_size(r: int) -> int:
    """|S^(r)| from interval arithmetic, without building the set."""
    if r < 1:
        raise DomainError(f"butterfly order must be positive, got r={r}")
    return sum(s_level_count(r, i) for i in range(r + 1))


def size_formula(r: int) -> int:
    """((3r+7) 2^r + 2 (-1)^r) / 9."""
    if r < 1:
        raise DomainError(f"butterfly order must be positive, got r={r}")
    value = (3 * r + 7) * 2**r + 2 * (-1) ** r
    if value % 9:
        raise AssertionError(f"|S^({r})| closed form is not integral")
    return value // 9


def size_sum_form(r: int) -> int:
    """J_{r+1} + sum_{i=1..r} 2^(r-i) J_i."""
    return jacobsthal(r + 1) + sum(2 ** (r - i) * jacobsthal(i) for i in range(1, r + 1))


def _row_index(r: int) -> np.ndarray:
    return np.arange(2**r, dtype=np.int64)


def _s_level(r: int, i: int) -> np.ndarray:
    x = _row_index(r)
    if i == r:
        return x < jacobsthal(r + 1)
    return (x % 2 ** (i + 1)) < jacobsthal(i + 1)


def _periodic_level(r: int, i: int) -> np.ndarray:
    x = _row_index(r)
    return (x % 2**i) < jacobsthal(i + 1)


def s_recursive_labels(r: int) -> tuple[int, ...]:
    """S^(r) in recursive numbering, from S^(1) = {1, 3} and the three-part recursion."""
    if r < 1:
        raise DomainError(f"butterfly order must be positive, got r={r}")
    labels = [1, 3]
    for q in range(2, r + 1):
        shift = q * 2 ** (q - 1)
        bound = (q - 1) * 2 ** (q - 1)
        top = q * 2**q
        labels = (
            labels
            + [j + shift for j in labels if j <= bound]
            + list(range(top + 1, top + jacobsthal(q + 1) + 1))
        )
    return tuple(sorted(labels))


def construct_S(r: int, ordering: Literal["layer", "recursive"] = "layer") -> VertexSet:
    """S^(r) as a vertex set.

    ``layer`` members are internal ids ``i * 2**r + x``; ``recursive`` members
    are recursive numbers minus one, matching the rows of the recursively
    ordered adjacency matrix.
    """
    if r < 1:
        raise DomainError(f"butterfly order must be positive, got r={r}")
    n = vertex_count(r)
    if ordering == "layer":
        mask = np.concatenate([_s_level(r, i) for i in range(r + 1)])
        return VertexSet(n, mask)
    if ordering == "recursive":
        return VertexSet.from_ids(n, (k - 1 for k in s_recursive_labels(r)))
    raise DomainError(f"unknown ordering {ordering!r}")


def layered_prediction(r: int, k: int) -> VertexSet:
    """Closed form of the colored set after step k of the level-scheduled process.

    For 1 <= k <= r levels r-k .. r-1 carry the intervals repeated with period
    2**i; for k = r + k' levels 0 .. k' are full and the others stay as at k = r.
    """
    if r < 1:
        raise DomainError(f"butterfly order must be positive, got r={r}")
    if not 0 <= k <= 2 * r:
        raise DomainError(f"step k={k} is outside [0, {2 * r}]")
    width = 2**r
    levels: list[np.ndarray] = []
    down = min(k, r)
    full_upto = k - r if k > r else -1
    for i in range(r + 1):
        if i <= full_upto:
            levels.append(np.ones(width, dtype=bool))
        elif i < r and i >= r - down:
            levels.append(_periodic_level(r, i))
        else:
            levels.append(_s_level(r, i))
    return VertexSet(vertex_count(r), np.concatenate(levels))


def layered_closure(net: ButterflyNetwork, s: VertexSet) -> ForcingTrace:
    """The level-scheduled process: 2r steps, each forcing into one prescribed level.

    Step k <= r lets level r-k+1 force into level r-k; step r+k lets level
    k-1 force into level k. A vertex forces only when its single uncolored
    neighbor lies in the target level.
    """
    g, r, width = net.graph, net.r, net.width
    _checked(g, s)
    colored = s.mask.copy()
    rounds: list[ForcingRound] = []
    for step in range(1, 2 * r + 1):
        src, dst = (r - step + 1, r - step) if step <= r else (step - r - 1, step - r)
        lo, hi = dst * width, (dst + 1) * width
        forces: list[tuple[int, int]] = []
        targets: set[int] = set()
        for v in range(src * width, (src + 1) * width):
            if not colored[v]:
                continue
            outside = [u for u in g.adjacency[v] if not colored[u]]
            if len(outside) == 1 and lo <= outside[0] < hi and outside[0] not in targets:
                targets.add(outside[0])
                forces.append((v, outside[0]))
        for w in targets:
            colored[w] = True
        rounds.append(ForcingRound(forces=forces, colored=np.flatnonzero(colored).tolist()))
    forcing = bool(colored.all())
    return ForcingTrace(
        initial=list(s.ids()),
        rounds=rounds,
        final=np.flatnonzero(colored).tolist(),
        pt=len(rounds) if forcing else None,
        forcing=forcing,
    )


def layered_discrepancy(net: ButterflyNetwork) -> list[dict[str, int]]:
    """Per step, how many vertices the unrestricted closure colors beyond the prediction."""
    r = net.r
    trace = closure(net.graph, construct_S(r, "layer"))
    snapshots = [trace.initial] + [rnd.colored for rnd in trace.rounds]
    report = []
    for k in range(2 * r + 1):
        simulated = VertexSet.from_ids(net.n, snapshots[min(k, len(snapshots) - 1)])
        predicted = layered_prediction(r, k)
        report.append(
            {
                "k": k,
                "predicted": len(predicted),
                "simulated": len(simulated),
                "extra": len(simulated - predicted),
                "missing": len(predicted - simulated),
            }
        )
    return report


# ---------------------------------------------------------------------------
# exhaustive search


class SearchBudget:
    def __init__(self, max_candidates: int | None, max_seconds: float | None) -> None:
        self.max_candidates = max_candidates
        self.max_seconds = max_seconds
        self.started = time.monotonic()
        self.used = 0

    def spend(self) -> bool:
        self.used += 1
        if self.max_candidates is not None and self.used > self.max_candidates:
            return False
        if self.max_seconds is not None and self.used % 1024 == 0:
            return time.monotonic() - self.started <= self.max_seconds
        return True

    @property
    def elapsed(self) -> float:
        return time.monotonic() - self.started


def _can_start(g: Graph, chosen: Sequence[int], mask: np.ndarray) -> bool:
    for v in chosen:
        if sum(1 for u in g.adjacency[v] if not mask[u]) == 1:
            return True
    return False


def search_min_size(g: Graph, start: int, budget: SearchBudget, accept, collect_all: bool = False):
    """(size, witnesses) for the first size from ``start`` that has an accepted subset."""
    n = g.n
    for size in range(start, n + 1):
        found: list[tuple[int, ...]] = []
        for chosen in combinations(range(n), size):
            if not budget.spend():
                raise ResourceLimitError(
                    f"search budget exhausted after {budget.used - 1} candidates; "
                    f"every size up to {size - 1} is excluded",
                    excluded_size=size - 1,
                )
            if accept(chosen):
                found.append(chosen)
                if not collect_all:
                    break
        if found:
            return size, found
        logger.debug("no witness of size %d", size)
    raise AssertionError("the full vertex set always qualifies")


def brute_force_Z(
    g: Graph,
    max_candidates: int | None = None,
    max_seconds: float | None = None,
    lower_bound: int | None = None,
) -> SearchResult:
    """Exact Z(G) with the lexicographically smallest minimum zero forcing set.

    Sizes below n - rank_GF(2)(A) are skipped; a candidate must contain a
    vertex with exactly one neighbor outside it, otherwise nothing can force.
    """
    if lower_bound is None:
        lower_bound = g.n - rank(ExactMatrix.from_graph(g, FieldTag.prime(2))) if g.n else 0
    budget = SearchBudget(max_candidates, max_seconds)

    def accept(chosen: tuple[int, ...]) -> bool:
        mask = np.zeros(g.n, dtype=bool)
        mask[list(chosen)] = True
        if len(chosen) < g.n and not _can_start(g, chosen, mask):
            return False
        _forcing_rounds(g, mask)
        return bool(mask.all())

    size, found = search_min_size(g, max(lower_bound, 1 if g.n else 0), budget, accept)
    logger.info("Z = %d after %d candidates", size, budget.used)
    return SearchResult(
        value=size,
        witness=list(found[0]),
        lower_bound=lower_bound,
        candidates_checked=budget.used,
        elapsed_seconds=budget.elapsed,
    )


def brute_force_pt(
    g: Graph,
    max_candidates: int | None = None,
    max_seconds: float | None = None,
) -> SearchResult:
    """pt(G): the least propagation time over all minimum zero forcing sets (exploratory)."""
    lower_bound = g.n - rank(ExactMatrix.from_graph(g, FieldTag.prime(2))) if g.n else 0
    budget = SearchBudget(max_candidates, max_seconds)

    def accept(chosen: tuple[int, ...]) -> bool:
        return is_zero_forcing(g, VertexSet.from_ids(g.n, chosen))

    size, found = search_min_size(g, max(lower_bound, 1 if g.n else 0), budget, accept, collect_all=True)
    times = [(propagation_time(g, VertexSet.from_ids(g.n, w)), w) for w in found]
    best_pt, best = min(times)
    return SearchResult(
        value=size,
        witness=list(best),
        lower_bound=lower_bound,
        candidates_checked=budget.used,
        elapsed_seconds=budget.elapsed,
        minimum_witnesses=len(found),
        pt=best_pt,
        status="exploratory",
    )
