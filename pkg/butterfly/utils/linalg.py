"""Exact rank and row-combination checks for symmetric 0/1 matrices.

Ranks are computed over the rationals (fraction-free sparse elimination on
Python integers), over GF(2) (numpy bit-packed rows) and over GF(p) (modular
sparse elimination).
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from itertools import chain
from math import gcd
from typing import Iterable, Sequence

import numpy as np

from butterfly.core.errors import DomainError, ResourceLimitError
from butterfly.utils.graph import Graph

logger = logging.getLogger(__name__)


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    k = 2
    while k * k <= p:
        if p % k == 0:
            return False
        k += 1
    return True


@dataclass(frozen=True)
class FieldTag:
    """The rationals (``p is None``) or the prime field GF(p)."""

    p: int | None = None

    def __post_init__(self) -> None:
        if self.p is not None and not _is_prime(self.p):
            raise DomainError(f"GF({self.p}) is not a prime field")

    @classmethod
    def rationals(cls) -> "FieldTag":
        return cls(None)

    @classmethod
    def prime(cls, p: int) -> "FieldTag":
        return cls(p)

    @classmethod
    def parse(cls, name: str) -> "FieldTag":
        key = name.strip().lower()
        if key in ("q", "rationals", "qq"):
            return cls.rationals()
        if key.startswith("gf") and key[2:].isdigit():
            return cls.prime(int(key[2:]))
        raise DomainError(f"unknown field {name!r}; use q, gf2, gf3 or gf<p>")

    @property
    def name(self) -> str:
        return "q" if self.p is None else f"gf{self.p}"


@dataclass(frozen=True, eq=False)
class ExactMatrix:
    """Square 0/1 matrix stored as sorted column supports per row (0-based)."""

    n: int
    rows: tuple[tuple[int, ...], ...]
    field: FieldTag = FieldTag()

    @classmethod
    def from_graph(cls, g: Graph, field: FieldTag | None = None, order: Sequence[int] | None = None) -> "ExactMatrix":
        """Adjacency matrix of ``g``; row k belongs to vertex ``order[k]``."""
        field = field or FieldTag.rationals()
        if order is None:
            return cls(n=g.n, rows=g.adjacency, field=field)
        if sorted(order) != list(range(g.n)):
            raise DomainError("order must be a permutation of the vertices")
        position = [0] * g.n
        for k, v in enumerate(order):
            position[v] = k
        rows = tuple(tuple(sorted(position[u] for u in g.adjacency[v])) for v in order)
        return cls(n=g.n, rows=rows, field=field)

    @classmethod
    def zeros(cls, n: int, field: FieldTag | None = None) -> "ExactMatrix":
        return cls(n=n, rows=tuple(() for _ in range(n)), field=field or FieldTag.rationals())

    def with_field(self, field: FieldTag) -> "ExactMatrix":
        return ExactMatrix(n=self.n, rows=self.rows, field=field)

    def permuted(self, order: Sequence[int]) -> "ExactMatrix":
        """P A P^T where row k of the result is row ``order[k]`` of this matrix."""
        if sorted(order) != list(range(self.n)):
            raise DomainError("order must be a permutation of the rows")
        position = [0] * self.n
        for k, v in enumerate(order):
            position[v] = k
        rows = tuple(tuple(sorted(position[c] for c in self.rows[v])) for v in order)
        return ExactMatrix(n=self.n, rows=rows, field=self.field)

    def row(self, label: int) -> tuple[int, ...]:
        """Support of the row with 1-based ``label``."""
        if not 1 <= label <= self.n:
            raise DomainError(f"row {label} is outside [1, {self.n}]")
        return self.rows[label - 1]

    def dense(self) -> np.ndarray:
        out = np.zeros((self.n, self.n), dtype=np.int8)
        for k, cols in enumerate(self.rows):
            out[k, list(cols)] = 1
        return out

    def is_symmetric(self) -> bool:
        return all(k in self.rows[c] for k, cols in enumerate(self.rows) for c in cols)

    def block(self, row_start: int, col_start: int, size: int) -> np.ndarray:
        """Dense ``size`` x ``size`` block with 0-based top-left corner."""
        out = np.zeros((size, size), dtype=np.int8)
        for k in range(size):
            for c in self.rows[row_start + k]:
                if col_start <= c < col_start + size:
                    out[k, c - col_start] = 1
        return out

    def to_text(self) -> str:
        return "\n".join(" ".join(map(str, line)) for line in self.dense().tolist()) + "\n"


def _primitive(row: dict[int, int]) -> dict[int, int]:
    content = 0
    for value in row.values():
        content = gcd(content, value)
        if content == 1:
            return row
    if content in (0, 1):
        return row
    return {col: value // content for col, value in row.items()}


def _rank_rational(rows: Iterable[Sequence[int]]) -> int:
    """Fraction-free elimination: every update is a*row - b*pivot with integer a, b."""
    pivots: dict[int, dict[int, int]] = {}
    for cols in rows:
        row = {c: 1 for c in cols}
        while row:
            lead = min(row)
            pivot = pivots.get(lead)
            if pivot is None:
                pivots[lead] = _primitive(row)
                break
            a, b = pivot[lead], row[lead]
            common = gcd(a, b)
            a, b = a // common, b // common
            merged: dict[int, int] = {}
            for col in row.keys() | pivot.keys():
                value = a * row.get(col, 0) - b * pivot.get(col, 0)
                if value:
                    merged[col] = value
            row = _primitive(merged)
    return len(pivots)


def _rank_mod_p(rows: Iterable[Sequence[int]], p: int) -> int:
    pivots: dict[int, dict[int, int]] = {}
    for cols in rows:
        row = {c: 1 for c in cols}
        while row:
            lead = min(row)
            pivot = pivots.get(lead)
            if pivot is None:
                inv = pow(row[lead], -1, p)
                pivots[lead] = {col: value * inv % p for col, value in row.items()}
                break
            factor = row[lead]
            merged: dict[int, int] = {}
            for col in row.keys() | pivot.keys():
                value = (row.get(col, 0) - factor * pivot.get(col, 0)) % p
                if value:
                    merged[col] = value
            row = merged
    return len(pivots)


def pack_gf2(m: ExactMatrix) -> np.ndarray:
    """Rows as little-endian uint64 words: column c is bit c % 64 of word c // 64."""
    words = max(1, (m.n + 63) // 64)
    packed = np.zeros((m.n, words), dtype=np.uint64)
    lengths = [len(cols) for cols in m.rows]
    total = sum(lengths)
    if total:
        row_idx = np.repeat(np.arange(m.n, dtype=np.int64), lengths)
        cols = np.fromiter(chain.from_iterable(m.rows), dtype=np.int64, count=total)
        bits = np.left_shift(np.uint64(1), (cols & 63).astype(np.uint64))
        np.bitwise_or.at(packed, (row_idx, cols >> 6), bits)
    return packed


def _rank_gf2(m: ExactMatrix) -> int:
    packed = pack_gf2(m)
    n_rows = m.n
    one = np.uint64(1)
    rank = 0
    for col in range(m.n):
        if rank == n_rows:
            break
        word = col >> 6
        shift = np.uint64(col & 63)
        hits = np.flatnonzero((packed[rank:, word] >> shift) & one)
        if hits.size == 0:
            continue
        pivot = rank + int(hits[0])
        if pivot != rank:
            packed[[rank, pivot]] = packed[[pivot, rank]]
        others = rank + hits[1:]
        if others.size:
            packed[others, word:] ^= packed[rank, word:]
        rank += 1
    return rank


def gf2_bytes(n: int) -> int:
    return n * max(1, (n + 63) // 64) * 8


def rank(m: ExactMatrix, memory_cap_bytes: int | None = None) -> int:
    """Exact rank of ``m`` over its field."""
    if m.field.p is None:
        value = _rank_rational(m.rows)
    elif m.field.p == 2:
        if memory_cap_bytes is not None and gf2_bytes(m.n) > memory_cap_bytes:
            raise ResourceLimitError(
                f"bit-packed elimination of a {m.n}x{m.n} matrix needs {gf2_bytes(m.n) // 2**20} MiB"
            )
        value = _rank_gf2(m)
    else:
        value = _rank_mod_p(m.rows, m.field.p)
    logger.debug("rank over %s of %dx%d matrix: %d", m.field.name, m.n, m.n, value)
    return value


def corank_lower_bound(g: Graph, field: FieldTag | None = None) -> int:
    """n - rank(A(g)).

    The adjacency matrix lies in S(F, G), so mr(G) <= rank(A); with
    mr(G) >= n - Z(G) this gives Z(G) >= n - rank(A).
    """
    return g.n - rank(ExactMatrix.from_graph(g, field or FieldTag.rationals()))


def _label_list(labels: Iterable[int], n: int, what: str) -> list[int]:
    values = [int(j) for j in labels]
    if len(set(values)) != len(values):
        raise DomainError(f"{what} repeats a row")
    for j in values:
        if not 1 <= j <= n:
            raise DomainError(f"{what} row {j} is outside [1, {n}]")
    return values


def combination_residual(
    m: ExactMatrix, target: int, kplus: Iterable[int], kminus: Iterable[int]
) -> dict[int, int]:
    """Nonzero entries of sum(kplus) - sum(kminus) - row(target), 0-based columns."""
    plus = _label_list(kplus, m.n, "kplus")
    minus = _label_list(kminus, m.n, "kminus")
    if not 1 <= target <= m.n:
        raise DomainError(f"target row {target} is outside [1, {m.n}]")
    if target in plus or target in minus:
        raise DomainError(f"target row {target} also appears in the combination")
    if set(plus) & set(minus):
        raise DomainError("kplus and kminus share a row")
    acc: Counter[int] = Counter()
    for j in plus:
        for col in m.rows[j - 1]:
            acc[col] += 1
    for j in minus:
        for col in m.rows[j - 1]:
            acc[col] -= 1
    for col in m.rows[target - 1]:
        acc[col] -= 1
    p = m.field.p
    if p is None:
        return {col: value for col, value in acc.items() if value}
    return {col: value % p for col, value in acc.items() if value % p}


def verify_combination(m: ExactMatrix, target: int, kplus: Iterable[int], kminus: Iterable[int]) -> bool:
    """True iff row(target) = sum of rows in kplus - sum of rows in kminus (1-based labels).

    Over the rationals the check is an integer identity with coefficients
    +-1, which then holds over every field.
    """
    return not combination_residual(m, target, kplus, kminus)


def theorem_formulas(r: int) -> tuple[int, int]:
    """(mr(BF(r)), Z(BF(r))) from the closed forms; they sum to (r+1)*2**r."""
    if r < 1:
        raise DomainError(f"butterfly order must be positive, got r={r}")
    sign = -1 if r % 2 else 1
    mr_num = 2 * ((3 * r + 1) * 2**r - sign)
    z_num = (3 * r + 7) * 2**r + 2 * sign
    if mr_num % 9 or z_num % 9:
        raise AssertionError(f"closed forms are not integral at r={r}")
    return mr_num // 9, z_num // 9
