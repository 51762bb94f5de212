from __future__ import annotations

from typing import Any, Tuple

from butterfly.core.models import CheckStep, VerifyReport


def check_equal(value: Any, expected: Any, description: str, **extra: Any) -> CheckStep:
    status = "ok" if value == expected else "fail"
    return CheckStep(
        description=description,
        data={"value": value, "expected": expected, "status": status, **extra},
    )


def check_at_most(value: int | None, bound: int, description: str) -> CheckStep:
    ok = value is not None and value <= bound
    return CheckStep(
        description=description,
        data={"value": value, "max": bound, "status": "ok" if ok else "fail"},
    )


def self_check_report(report: VerifyReport) -> Tuple[bool, list[CheckStep]]:
    """Check every equality of n - Z = mr = rank for the report; return extra steps."""
    steps: list[CheckStep] = [
        check_equal(report.s_size, report.z_formula, "Размер S^(r) совпадает с формулой Z"),
        check_equal(report.forcing_ok, True, "S^(r) является zero forcing множеством"),
        check_at_most(report.pt_observed, 2 * report.r, "Время распространения pt(S) <= 2r"),
        check_equal(report.n - report.z_formula, report.mr_formula, "n - Z = mr по формулам"),
    ]
    for name, value in sorted(report.rank_per_field.items()):
        steps.append(check_equal(value, report.mr_formula, f"Ранг над {name} равен mr", field=name))
    steps.append(check_equal(report.cert_count, report.s_size, "Сертификат для каждой строки из S^(r)"))
    steps.append(check_equal(report.certs_ok, True, "Все сертификаты проверены точно"))
    if report.brute_force_z is not None:
        steps.append(check_equal(report.brute_force_z, report.z_formula, "Перебор подтверждает Z"))
    ok = all(step.ok for step in steps)
    steps.append(
        CheckStep(
            description="Итог self-check",
            data={
                "ok": ok,
                "skipped_fields": report.skipped_fields,
                "note": "При ok=False одно из равенств не выполнено, см. шаги со status=fail.",
            },
        )
    )
    return ok, steps
