#!/usr/bin/env python3
"""Скрипт для проверки равенств n - Z = mr = rank на бабочках BF(r)."""

from __future__ import annotations

import logging
import os
import sys
from pathlib import Path

# Добавляем butterfly в path
ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from dotenv import load_dotenv

load_dotenv()

from butterfly.core.config import AppConfig
from butterfly.utils.certificates import CertificateLibrary, lemma34_parts
from butterfly.utils.forcing import construct_S, propagation_time, size_formula
from butterfly.utils.linalg import theorem_formulas
from butterfly.utils.network import generate
from butterfly.utils.pipeline import verify_pipeline
from butterfly.utils.power import pd_lower_bound

R_MAX = int(os.getenv("BUTTERFLY_CHECK_R_MAX", "6"))


def print_section(title: str) -> None:
    """Печатает заголовок секции."""
    print("\n" + "=" * 80)
    print(f"  {title}")
    print("=" * 80)


def check_1_formulas() -> bool:
    """Проверка 1: замкнутые формулы для mr и Z."""
    print_section("ПРОВЕРКА 1: Формулы mr(BF(r)) и Z(BF(r))")
    ok = True
    for r in range(1, 31):
        mr, z = theorem_formulas(r)
        if mr + z != (r + 1) * 2**r:
            print(f"❌ ОШИБКА: r={r}: mr + Z = {mr + z}, ожидалось {(r + 1) * 2**r}")
            ok = False
    if ok:
        print("✅ mr + Z = (r+1)2^r для r = 1..30")
    return ok


def check_2_forcing() -> bool:
    """Проверка 2: S^(r) является zero forcing множеством."""
    print_section("ПРОВЕРКА 2: Zero forcing множества S^(r)")
    config = AppConfig()
    ok = True
    for r in range(1, R_MAX + 1):
        net = generate(r, config)
        s = construct_S(r, "layer")
        pt = propagation_time(net.graph, s)
        good = len(s) == size_formula(r) and pt is not None and pt <= 2 * r
        mark = "✅" if good else "❌"
        print(f"{mark} r={r}: |S|={len(s)} (формула {size_formula(r)}), pt={pt}")
        ok = ok and good
    return ok


def check_3_pipeline() -> bool:
    """Проверка 3: полная проверка ранга и сертификатов."""
    print_section("ПРОВЕРКА 3: Ранг и сертификаты")
    config = AppConfig()
    ok = True
    for r in range(1, R_MAX + 1):
        try:
            report = verify_pipeline(r, fields=["q", "gf2", "gf3"], config=config)
        except Exception as e:
            print(f"❌ ОШИБКА: r={r}: {e}")
            import traceback
            traceback.print_exc()
            return False
        mark = "✅" if report.ok else "❌"
        print(f"{mark} r={r}: ранги {report.rank_per_field}, mr={report.mr_formula}, сертификатов {report.cert_count}")
        if report.skipped_fields:
            print(f"   Пропущены поля: {', '.join(report.skipped_fields)}")
        ok = ok and report.ok
    return ok


def check_4_worked_example() -> bool:
    """Проверка 4: сертификат строки 65 для r=4."""
    print_section("ПРОВЕРКА 4: Сертификат строки 65 в A_4")
    parts = lemma34_parts(4, 1, CertificateLibrary())
    expected = {
        "k1_minus": (14, 18, 46, 50),
        "k1_plus": (21, 24, 53, 56),
        "k2_minus": (76, 77, 80),
        "k2_plus": (),
    }
    ok = True
    for name, value in expected.items():
        got = getattr(parts, name)
        mark = "✅" if got == value else "❌"
        print(f"{mark} {name}: {list(got)}")
        ok = ok and got == value
    return ok


def check_5_power_domination() -> bool:
    """Проверка 5: нижняя граница для power domination."""
    print_section("ПРОВЕРКА 5: Power domination")
    bounds = {r: pd_lower_bound(r) for r in range(1, R_MAX + 1)}
    print(f"✅ ceil(Z/Δ): {bounds}")
    return bounds.get(4, 9) == 9


def main() -> None:
    """Основная функция проверки."""
    logging.basicConfig(level=AppConfig().log_level)
    print("\n" + "🦋" * 40)
    print("  ПРОВЕРКА ТЕОРЕМЫ О БАБОЧКАХ")
    print("🦋" * 40)

    results = []

    # Запускаем проверки
    results.append(("Formulas", check_1_formulas()))
    results.append(("Zero forcing", check_2_forcing()))
    results.append(("Rank and certificates", check_3_pipeline()))
    results.append(("Worked example r=4", check_4_worked_example()))
    results.append(("Power domination", check_5_power_domination()))

    # Итоговый отчет
    print_section("ИТОГОВЫЙ ОТЧЕТ")

    all_passed = True
    for name, passed in results:
        status = "✅ PASSED" if passed else "❌ FAILED"
        print(f"{status}: {name}")
        if not passed:
            all_passed = False

    print("\n" + "=" * 80)
    if all_passed:
        print("🎉 ВСЕ ПРОВЕРКИ ПРОЙДЕНЫ")
        sys.exit(0)
    else:
        print("❌ НЕКОТОРЫЕ ПРОВЕРКИ НЕ ПРОЙДЕНЫ")
        sys.exit(1)


if __name__ == "__main__":
    main()
