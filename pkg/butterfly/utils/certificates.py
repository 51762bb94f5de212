"""Row-dependence certificates for the rows of A_r indexed by S^(r).

Every certificate writes a row as the sum of the rows in ``kplus`` minus the
rows in ``kminus``, all of them outside S^(r). Books are built from the two
base books by lifting certificates from BF(r-1) and BF(r-2).
"""

from __future__ import annotations

import logging
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Mapping

from butterfly.core.config import AppConfig
from butterfly.core.errors import CertificateError, DomainError
from butterfly.core.models import Certificate, CertificateBook, Lemma34Parts
from butterfly.utils.forcing import jacobsthal, s_recursive_labels
from butterfly.utils.linalg import ExactMatrix, verify_combination
from butterfly.utils.network import adjacency_matrix, generate

logger = logging.getLogger(__name__)

_BASE_IDENTITIES: dict[int, list[tuple[int, tuple[int, ...], tuple[int, ...]]]] = {
    1: [
        (1, (2,), ()),
        (3, (4,), ()),
    ],
    2: [
        (1, (2,), ()),
        (5, (6,), ()),
        (3, (4, 7), (8,)),
        (9, (2, 6), (12,)),
        (10, (12,), ()),
        (11, (2, 6), (12,)),
    ],
}


def base_book(r: int) -> CertificateBook:
    """The printed identities for A_1 and A_2."""
    if r not in _BASE_IDENTITIES:
        raise DomainError(f"base certificates exist for r=1 and r=2 only, got r={r}")
    return CertificateBook(
        r=r,
        certs=[Certificate(r=r, target=t, kplus=kp, kminus=km) for t, kp, km in _BASE_IDENTITIES[r]],
    )


def _half(r: int) -> int:
    return r * 2 ** (r - 1)


def lift_lemma1(cert: Certificate, r: int) -> tuple[Certificate, Certificate]:
    """Row i of A_{r-1} with i <= (r-1)2^(r-1): reused at i and translated to i + r2^(r-1)."""
    if cert.r != r - 1:
        raise DomainError(f"expected a certificate of A_{r - 1}, got A_{cert.r}")
    if cert.target > (r - 1) * 2 ** (r - 1):
        raise DomainError(f"row {cert.target} is above (r-1)2^(r-1) for r={r}")
    same = Certificate(r=r, target=cert.target, kplus=cert.kplus, kminus=cert.kminus)
    return same, cert.translated(_half(r), r=r)


def lift_lemma2(cert: Certificate, r: int) -> Certificate:
    """Row i of A_{r-1} in the top band (r-1)2^(r-1) < i <= (r-1)2^(r-1) + J_r."""
    if cert.r != r - 1:
        raise DomainError(f"expected a certificate of A_{r - 1}, got A_{cert.r}")
    low = (r - 1) * 2 ** (r - 1)
    if not low < cert.target <= low + jacobsthal(r):
        raise DomainError(f"row {cert.target} is outside the top band of A_{r - 1}")
    shift = _half(r)
    return Certificate(
        r=r,
        target=cert.target,
        kplus=(*cert.kplus, *(j + shift for j in cert.kminus), cert.target + shift),
        kminus=(*cert.kminus, *(j + shift for j in cert.kplus)),
    )


def _source_band(r: int) -> tuple[int, int]:
    """Rows (r-2)2^(r-2)+1 .. (r-2)2^(r-2)+J_{r-1} of A_{r-2}, inclusive."""
    base = (r - 2) * 2 ** (r - 2)
    return base + 1, base + jacobsthal(r - 1)


def large_enough_holds(cert: Certificate, r: int) -> bool:
    """K+ together with K-' meets the source band in the source row only."""
    lo, hi = _source_band(r)
    touched = {j for j in (*cert.kplus, *cert.kminus, cert.target) if lo <= j <= hi}
    return touched == {cert.target}


def lift_lemma34(cert: Certificate, r: int, i: int) -> tuple[Certificate, Lemma34Parts]:
    """Row r2^r + i of A_r from row (r-2)2^(r-2) + i of A_{r-2}, for 1 <= i <= J_{r-1}.

    The source dependence is translated by (r-1)2^(r-2) and (3r-1)2^(r-2);
    rows past r2^r + J_{r+1} at offsets (3r+4)2^(r-2) and (3r+5)2^(r-2)
    cancel what remains.
    """
    if r < 3:
        raise DomainError(f"the two-level lift needs r >= 3, got r={r}")
    if not 1 <= i <= jacobsthal(r - 1):
        raise DomainError(f"i={i} is outside [1, J_{r - 1}={jacobsthal(r - 1)}]")
    if cert.r != r - 2:
        raise DomainError(f"expected a certificate of A_{r - 2}, got A_{cert.r}")
    q = 2 ** (r - 2)
    source = (r - 2) * q + i
    if cert.target != source:
        raise DomainError(f"expected the certificate of row {source}, got row {cert.target}")
    if not large_enough_holds(cert, r):
        raise DomainError(f"certificate of row {source} uses another row of its band")

    kplus = cert.kplus
    kminus = cert.kminus
    kminus_prime = tuple(sorted((*kminus, source)))
    top = (r - 2) * q

    k1_plus = tuple(j + (r - 1) * q for j in kminus_prime) + tuple(j + (3 * r - 1) * q for j in kminus_prime)
    k1_minus = tuple(j + (r - 1) * q for j in kplus) + tuple(j + (3 * r - 1) * q for j in kplus)
    k2_plus = tuple(j + (3 * r + 4) * q for j in kplus if j > top) + tuple(
        j + (3 * r + 5) * q for j in kplus if j > top
    )
    # The second half draws on K-' (K- with the source row), not on K+ or K- alone.
    k2_minus = tuple(j + (3 * r + 4) * q for j in kminus if j > top) + tuple(
        j + (3 * r + 5) * q for j in kminus_prime if j > top
    )
    parts = Lemma34Parts(
        r=r,
        i=i,
        source_kplus=kplus,
        source_kminus_prime=kminus_prime,
        k1_plus=tuple(sorted(k1_plus)),
        k1_minus=tuple(sorted(k1_minus)),
        k2_plus=tuple(sorted(k2_plus)),
        k2_minus=tuple(sorted(k2_minus)),
    )
    lifted = Certificate(r=r, target=r * 2**r + i, kplus=k1_plus + k2_plus, kminus=k1_minus + k2_minus)
    return lifted, parts


def duplicate_row_certs(r: int, low_band: Mapping[int, Certificate]) -> list[Certificate]:
    """Top-band rows r2^r + i with J_{r-1} < i <= J_{r+1}.

    Up to 2^(r-1) the row equals row r2^r + i + 2^(r-1), which is outside
    S^(r). Beyond it the row equals row r2^r + i - 2^(r-1), itself a row of
    ``low_band``, whose certificate is reused.
    """
    if r < 2:
        raise DomainError(f"duplicate top-band rows start at r=2, got r={r}")
    top, half = r * 2**r, 2 ** (r - 1)
    certs = []
    for i in range(jacobsthal(r - 1) + 1, jacobsthal(r + 1) + 1):
        if i <= half:
            certs.append(Certificate(r=r, target=top + i, kplus=(top + i + half,)))
            continue
        partner = low_band.get(top + i - half)
        if partner is None:
            raise DomainError(f"row {top + i - half} of A_{r} has no certificate to reuse")
        certs.append(Certificate(r=r, target=top + i, kplus=partner.kplus, kminus=partner.kminus))
    return certs


def lift_book(r: int, previous: CertificateBook, before: CertificateBook) -> CertificateBook:
    """Assemble the book of A_r from the books of A_{r-1} and A_{r-2}."""
    if previous.r != r - 1 or before.r != r - 2:
        raise DomainError(f"books for r={r - 1} and r={r - 2} are required")
    certs: list[Certificate] = []
    inner_rows = (r - 1) * 2 ** (r - 1)
    for cert in previous.certs:
        if cert.target <= inner_rows:
            certs.extend(lift_lemma1(cert, r))
        else:
            certs.append(lift_lemma2(cert, r))
    sources = before.as_mapping()
    low_band: dict[int, Certificate] = {}
    q = 2 ** (r - 2)
    for i in range(1, jacobsthal(r - 1) + 1):
        lifted, _ = lift_lemma34(sources[(r - 2) * q + i], r, i)
        low_band[lifted.target] = lifted
    certs.extend(low_band.values())
    certs.extend(duplicate_row_certs(r, low_band))
    return CertificateBook(r=r, certs=certs)


def _verify_chunk(matrix: ExactMatrix, certs: list[Certificate]) -> list[int]:
    return [c.target for c in certs if not verify_combination(matrix, c.target, c.kplus, c.kminus)]


def verify_book(book: CertificateBook, matrix: ExactMatrix, jobs: int = 1) -> list[int]:
    """Targets whose certificate does not hold in ``matrix`` (recursive ordering)."""
    if matrix.n != (book.r + 1) * 2**book.r:
        raise DomainError(f"matrix of order {matrix.n} does not belong to A_{book.r}")
    if jobs <= 1 or len(book.certs) < 2 * jobs:
        return _verify_chunk(matrix, book.certs)
    size = -(-len(book.certs) // jobs)
    chunks = [book.certs[k : k + size] for k in range(0, len(book.certs), size)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        results = pool.map(_verify_chunk, [matrix] * len(chunks), chunks)
    return sorted(t for part in results for t in part)


def avoids_s(book: CertificateBook) -> bool:
    """No certificate uses a row indexed by S^(r)."""
    s = set(s_recursive_labels(book.r))
    return all(not (cert.support & s) for cert in book.certs)


def covers_s(book: CertificateBook) -> bool:
    return book.targets == list(s_recursive_labels(book.r))


class CertificateLibrary:
    """Books memoized across r, optionally persisted as ``book_<r>.json``."""

    def __init__(
        self,
        cache_dir: Path | None = None,
        config: AppConfig | None = None,
        jobs: int = 1,
    ) -> None:
        self.config = config or AppConfig()
        self.cache_dir = Path(cache_dir) if cache_dir else self.config.cache_dir
        self.jobs = jobs
        self._books: dict[int, CertificateBook] = {}

    def _cache_path(self, r: int) -> Path | None:
        return self.cache_dir / f"book_{r}.json" if self.cache_dir else None

    def _load(self, r: int) -> CertificateBook | None:
        path = self._cache_path(r)
        if path is None or not path.exists():
            return None
        book = CertificateBook.model_validate_json(path.read_text(encoding="utf-8"))
        if book.r != r:
            logger.warning("ignoring %s: it holds the book for r=%d", path, book.r)
            return None
        logger.info("loaded certificate book r=%d from %s", r, path)
        return book

    def _store(self, book: CertificateBook) -> None:
        path = self._cache_path(book.r)
        if path is None:
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(book.model_dump_json(), encoding="utf-8")

    def get(self, r: int) -> CertificateBook:
        if r < 1:
            raise DomainError(f"butterfly order must be positive, got r={r}")
        if r in self._books:
            return self._books[r]
        cached = self._load(r)
        if cached is not None:
            book = cached
        elif r in _BASE_IDENTITIES:
            book = base_book(r)
        else:
            book = lift_book(r, self.get(r - 1), self.get(r - 2))
        self._check(book)
        if cached is None:
            self._store(book)
        self._books[r] = book
        return book

    def _check(self, book: CertificateBook) -> None:
        started = time.monotonic()
        matrix = adjacency_matrix(generate(book.r, self.config), "recursive")
        failed = verify_book(book, matrix, jobs=self.jobs)
        if failed:
            raise CertificateError(book.r, failed[0])
        if not covers_s(book):
            raise CertificateError(book.r, 0, f"book for r={book.r} does not cover S^({book.r})")
        logger.info(
            "certificate book r=%d: %d certificates verified in %.2fs",
            book.r,
            len(book.certs),
            time.monotonic() - started,
        )


def build_book(r: int, library: CertificateLibrary | None = None) -> CertificateBook:
    """Complete, verified book for A_r."""
    return (library or CertificateLibrary()).get(r)


def lemma34_parts(r: int, i: int, library: CertificateLibrary | None = None) -> Lemma34Parts:
    """The index sets behind the certificate of row r2^r + i, for display."""
    if r < 3:
        raise DomainError(f"the two-level lift needs r >= 3, got r={r}")
    if not 1 <= i <= jacobsthal(r - 1):
        raise DomainError(f"i={i} is outside [1, J_{r - 1}={jacobsthal(r - 1)}]")
    source = (library or CertificateLibrary()).get(r - 2).get((r - 2) * 2 ** (r - 2) + i)
    return lift_lemma34(source, r, i)[1]


def lemma34_partial_sum(matrix: ExactMatrix, parts: Lemma34Parts) -> dict[int, int]:
    """Nonzero entries (1-based columns) of the rows in K~1+ minus the rows in K~1-."""
    acc: Counter[int] = Counter()
    for j in parts.k1_plus:
        for col in matrix.row(j):
            acc[col + 1] += 1
    for j in parts.k1_minus:
        for col in matrix.row(j):
            acc[col + 1] -= 1
    return {col: value for col, value in sorted(acc.items()) if value}


def partial_sum_bands(r: int) -> tuple[range, range]:
    """Column bands (r-1)2^(r-1)+1 .. r2^(r-1) and (2r-1)2^(r-1)+1 .. r2^r."""
    half = 2 ** (r - 1)
    return range((r - 1) * half + 1, r * half + 1), range((2 * r - 1) * half + 1, r * 2**r + 1)


def quarter_profile(r: int, partial: Mapping[int, int]) -> list[int] | None:
    """The value repeated at the four positions of each quarter, or None if they differ."""
    half, q = 2 ** (r - 1), 2 ** (r - 2)
    starts = ((r - 1) * half, (r - 1) * half + q, (2 * r - 1) * half, (2 * r - 1) * half + q)
    profile = []
    for j in range(1, q + 1):
        values = {partial.get(s + j, 0) for s in starts}
        if len(values) != 1:
            return None
        profile.append(values.pop())
    return profile


def expected_profile(parts: Lemma34Parts) -> list[int]:
    """+1 where (r-2)2^(r-2)+j lies in K-', -1 where it lies in K+, else 0."""
    q = 2 ** (parts.r - 2)
    base = (parts.r - 2) * q
    plus, minus_prime = set(parts.source_kplus), set(parts.source_kminus_prime)
    return [1 if base + j in minus_prime else -1 if base + j in plus else 0 for j in range(1, q + 1)]

