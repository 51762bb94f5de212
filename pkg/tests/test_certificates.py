from __future__ import annotations

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.append(str(ROOT))

import pytest
from pydantic import ValidationError

from butterfly.core.errors import CertificateError, DomainError
from butterfly.core.models import Certificate, CertificateBook
from butterfly.utils.certificates import (
    CertificateLibrary,
    avoids_s,
    base_book,
    build_book,
    covers_s,
    duplicate_row_certs,
    expected_profile,
    large_enough_holds,
    lemma34_parts,
    lemma34_partial_sum,
    lift_lemma1,
    lift_lemma2,
    lift_lemma34,
    partial_sum_bands,
    quarter_profile,
    verify_book,
)
from butterfly.utils.forcing import jacobsthal, size_formula
from butterfly.utils.linalg import FieldTag, verify_combination
from butterfly.utils.network import adjacency_matrix, generate


def _matrix(r: int):
    return adjacency_matrix(generate(r), "recursive")


def test_base_books() -> None:
    """
    Проверяет базовые тождества для A_1 и A_2.

    A_1(1) = A_1(2), A_2(10) = A_2(12), A_2(11) = A_2(2)+A_2(6)-A_2(12);
    все тождества верны над Z.
    """
    one, two = base_book(1), base_book(2)
    assert one.targets == [1, 3]
    assert one.get(1).kplus == (2,)
    assert two.targets == [1, 3, 5, 9, 10, 11]
    assert two.get(10).kplus == (12,) and two.get(10).kminus == ()
    assert (two.get(11).kplus, two.get(11).kminus) == ((2, 6), (12,))
    assert verify_book(one, _matrix(1)) == []
    assert verify_book(two, _matrix(2)) == []
    with pytest.raises(DomainError):
        base_book(3)


def test_certificate_model_invariants() -> None:
    """
    Проверяет инварианты модели сертификата.

    Множества сортируются; пересечение K+ и K- или цель внутри
    комбинации отклоняются.
    """
    cert = Certificate(r=2, target=9, kplus=(6, 2), kminus=(12,))
    assert cert.kplus == (2, 6)
    with pytest.raises(ValidationError):
        Certificate(r=2, target=9, kplus=(2,), kminus=(2,))
    with pytest.raises(ValidationError):
        Certificate(r=2, target=9, kplus=(9,))


def test_lift_lemma1() -> None:
    """
    Проверяет перенос сертификата из A_2 в A_3 для строк i <= 8.

    Строка 1 использует те же множества, строка 1 + 12 = 13 -
    сдвинутые на 12.
    """
    same, moved = lift_lemma1(base_book(2).get(1), 3)
    assert (same.target, same.kplus) == (1, (2,))
    assert (moved.target, moved.kplus) == (13, (14,))
    a3 = _matrix(3)
    for cert in (same, moved):
        assert verify_combination(a3, cert.target, cert.kplus, cert.kminus)
    with pytest.raises(DomainError):
        lift_lemma1(base_book(2).get(9), 3)


def test_lift_lemma1_keeps_sets_at_r4() -> None:
    """
    Проверяет, что строка 3 из A_3 переносится в A_4 без изменений.
    """
    cert3 = build_book(3).get(3)
    same, moved = lift_lemma1(cert3, 4)
    assert (same.kplus, same.kminus) == (cert3.kplus, cert3.kminus)
    assert len(moved.kplus) == len(cert3.kplus) and len(moved.kminus) == len(cert3.kminus)
    a4 = _matrix(4)
    assert verify_combination(a4, same.target, same.kplus, same.kminus)
    assert verify_combination(a4, moved.target, moved.kplus, moved.kminus)


def test_lift_lemma2_keeps_kminus() -> None:
    """
    Проверяет перенос строки 9 из A_2 в A_3.

    K'+ = {2,6,21,24}, K'- = {12,14,18}: исходное K- = {12}
    остается в K'-, иначе равенство не выполняется.
    """
    cert = lift_lemma2(base_book(2).get(9), 3)
    assert cert.target == 9
    assert cert.kplus == (2, 6, 21, 24)
    assert cert.kminus == (12, 14, 18)
    a3 = _matrix(3)
    assert verify_combination(a3, 9, cert.kplus, cert.kminus)
    assert not verify_combination(a3, 9, cert.kplus, (14, 18))
    with pytest.raises(DomainError):
        lift_lemma2(base_book(2).get(1), 3)


def test_lift_lemma34_r3() -> None:
    """
    Проверяет построение строки 25 в A_3 из A_1(3) = A_1(4).

    K~+ = {7,19,30,32}, K~- = {8,20,31}.
    """
    cert, parts = lift_lemma34(base_book(1).get(3), 3, 1)
    assert cert.target == 25
    assert cert.kplus == (7, 19, 30, 32)
    assert cert.kminus == (8, 20, 31)
    assert parts.source_kminus_prime == (3,)
    assert verify_combination(_matrix(3), 25, cert.kplus, cert.kminus)


def test_lift_lemma34_r4_worked_example() -> None:
    """
    Проверяет сертификат строки 65 в A_4 (r = 4, i = 1).

    K+ = {2,6}, K'- = {9,12}; K~1- = {14,18,46,50},
    K~1+ = {21,24,53,56}, K~2- = {76,77,80}, K~2+ пусто.
    """
    cert, parts = lift_lemma34(base_book(2).get(9), 4, 1)
    assert parts.source_kplus == (2, 6)
    assert parts.source_kminus_prime == (9, 12)
    assert parts.k1_minus == (14, 18, 46, 50)
    assert parts.k1_plus == (21, 24, 53, 56)
    assert parts.k2_minus == (76, 77, 80)
    assert parts.k2_plus == ()
    assert cert.target == 65
    assert verify_combination(_matrix(4), 65, cert.kplus, cert.kminus)
    assert not set(cert.kplus + cert.kminus) & set(build_book(4).targets)


def test_lift_lemma34_preconditions() -> None:
    """
    Проверяет ограничения двухуровневого шага.

    r >= 3, 1 <= i <= J_{r-1}, источник - строка (r-2)2^(r-2)+i.
    """
    with pytest.raises(DomainError):
        lift_lemma34(base_book(1).get(3), 2, 1)
    with pytest.raises(DomainError):
        lift_lemma34(base_book(2).get(9), 4, jacobsthal(3) + 1)
    with pytest.raises(DomainError):
        lift_lemma34(base_book(2).get(10), 4, 1)


def test_duplicate_rows_r4() -> None:
    """
    Проверяет строки-дубликаты верхнего уровня A_4.

    i = 4 (J_3 < 4 <= 8): партнер 68 + 8 = 76; i = 9 (> 8): строка 73
    равна строке 65 и использует ее сертификат.
    """
    low_band = {c.target: c for c in (lift_lemma34(base_book(2).get(8 + i), 4, i)[0] for i in (1, 2, 3))}
    certs = {c.target: c for c in duplicate_row_certs(4, low_band)}
    assert sorted(certs) == list(range(68, 76))
    assert certs[68].kplus == (76,)
    assert (certs[73].kplus, certs[73].kminus) == (low_band[65].kplus, low_band[65].kminus)
    a4 = _matrix(4)
    for cert in certs.values():
        assert verify_combination(a4, cert.target, cert.kplus, cert.kminus)


@pytest.mark.parametrize("r", range(1, 9))
def test_build_book_is_complete(r: int) -> None:
    """
    Проверяет полную книгу сертификатов для r <= 8.

    Ровно |S^(r)| сертификатов, цели совпадают с S^(r), все проверены
    над Z и не используют строк из S^(r).
    """
    book = build_book(r)
    assert len(book.certs) == size_formula(r)
    assert covers_s(book)
    assert avoids_s(book)
    assert verify_book(book, _matrix(r)) == []


@pytest.mark.parametrize("r", range(1, 5))
@pytest.mark.parametrize("p", (2, 3))
def test_books_hold_over_prime_fields(r: int, p: int) -> None:
    """
    Проверяет сертификаты над GF(2) и GF(3).

    Тождества с коэффициентами +-1 верны над Z, поэтому каждое из них
    выполняется и после приведения матрицы по простому модулю.
    """
    book = build_book(r)
    matrix = adjacency_matrix(generate(r), "recursive", FieldTag.prime(p))
    assert verify_book(book, matrix) == []
    for cert in book.certs:
        assert verify_combination(matrix, cert.target, cert.kplus, cert.kminus)


@pytest.mark.slow
@pytest.mark.parametrize("r", (9, 10))
def test_build_book_large(r: int) -> None:
    """
    Проверяет книги для r = 9 и 10.
    """
    book = build_book(r)
    assert len(book.certs) == size_formula(r)
    assert avoids_s(book)


def test_large_enough_holds_for_sources() -> None:
    """
    Проверяет, что сертификат источника задевает полосу только в цели.
    """
    library = CertificateLibrary()
    for r in range(3, 8):
        source = library.get(r - 2)
        base = (r - 2) * 2 ** (r - 2)
        for i in range(1, jacobsthal(r - 1) + 1):
            assert large_enough_holds(source.get(base + i), r)


def test_verify_book_detects_tampering() -> None:
    """
    Проверяет обнаружение неверного сертификата.

    Испорченная запись возвращается по номеру цели.
    """
    book = build_book(4)
    certs = [c if c.target != 65 else Certificate(r=4, target=65, kplus=c.kplus) for c in book.certs]
    assert verify_book(CertificateBook(r=4, certs=certs), _matrix(4)) == [65]
    with pytest.raises(DomainError):
        verify_book(book, _matrix(3))


def test_verify_book_in_parallel() -> None:
    """
    Проверяет параллельную проверку в нескольких процессах.
    """
    book = build_book(5)
    assert verify_book(book, _matrix(5), jobs=2) == []


def test_library_cache_round_trip(tmp_path: Path) -> None:
    """
    Проверяет кэш книг в JSON.

    Книга сохраняется в book_<r>.json и загружается без перестроения.
    """
    book = CertificateLibrary(cache_dir=tmp_path).get(3)
    assert (tmp_path / "book_3.json").exists()
    assert (tmp_path / "book_1.json").exists()
    assert CertificateLibrary(cache_dir=tmp_path).get(3) == book


def test_library_rejects_broken_cache(tmp_path: Path) -> None:
    """
    Проверяет, что книга из кэша проверяется заново.

    Неверное тождество A_1(1) = A_1(4) дает CertificateError.
    """
    broken = CertificateBook(
        r=1,
        certs=[Certificate(r=1, target=1, kplus=(4,)), Certificate(r=1, target=3, kplus=(4,))],
    )
    (tmp_path / "book_1.json").write_text(broken.model_dump_json(), encoding="utf-8")
    with pytest.raises(CertificateError) as info:
        CertificateLibrary(cache_dir=tmp_path).get(1)
    assert info.value.target == 1


@pytest.mark.parametrize("r", (3, 4, 5))
def test_partial_sum_quarter_pattern(r: int) -> None:
    """
    Проверяет промежуточный вектор x двухуровневого шага.

    Сумма строк K~1+ минус K~1- сосредоточена в двух полосах
    столбцов и повторяет по четвертям значения: +1 для K'-, -1 для K+.
    """
    library = CertificateLibrary()
    matrix = _matrix(r)
    first, second = partial_sum_bands(r)
    for i in range(1, jacobsthal(r - 1) + 1):
        parts = lemma34_parts(r, i, library)
        partial = lemma34_partial_sum(matrix, parts)
        assert all(col in first or col in second for col in partial)
        assert quarter_profile(r, partial) == expected_profile(parts)


def test_lemma34_parts_domain() -> None:
    """
    Проверяет ограничения на r и i при выводе частей сертификата.
    """
    with pytest.raises(DomainError):
        lemma34_parts(2, 1)
    with pytest.raises(DomainError):
        lemma34_parts(5, jacobsthal(4) + 1)
