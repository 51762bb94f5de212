"""End-to-end verification of n - Z(BF(r)) = mr(BF(r)) = rank(A_r) and stage timings."""

from __future__ import annotations

import logging
import time
from typing import Any, Iterable, Sequence

from butterfly.core.config import AppConfig
from butterfly.core.errors import CertificateError, ResourceLimitError
from butterfly.core.models import CheckStep, VerifyReport
from butterfly.utils.certificates import CertificateLibrary, avoids_s
from butterfly.utils.forcing import (
    brute_force_Z,
    construct_S,
    layered_closure,
    layered_prediction,
    propagation_time,
)
from butterfly.utils.linalg import FieldTag, rank, theorem_formulas
from butterfly.utils.network import ButterflyNetwork, adjacency_matrix, generate
from butterfly.utils.self_check import check_equal, self_check_report

logger = logging.getLogger(__name__)


def _field_ranks(
    net: ButterflyNetwork, fields: Sequence[str], config: AppConfig
) -> tuple[dict[str, int], list[str]]:
    ranks: dict[str, int] = {}
    skipped: list[str] = []
    for name in fields:
        tag = FieldTag.parse(name)
        if net.r > config.limits.rank_cap(tag.name):
            logger.info("rank over %s skipped: r=%d above cap", tag.name, net.r)
            skipped.append(tag.name)
            continue
        started = time.monotonic()
        try:
            ranks[tag.name] = rank(adjacency_matrix(net, field=tag), config.memory_cap_bytes)
        except ResourceLimitError as exc:
            logger.warning("rank over %s skipped: %s", tag.name, exc)
            skipped.append(tag.name)
            continue
        logger.info("rank over %s: %d (%.2fs)", tag.name, ranks[tag.name], time.monotonic() - started)
    return ranks, skipped


def layered_step(net: ButterflyNetwork) -> CheckStep:
    """Compare the level-scheduled process with its closed form at every step."""
    trace = layered_closure(net, construct_S(net.r, "layer"))
    mismatched = [
        k
        for k, rnd in enumerate(trace.rounds, start=1)
        if set(rnd.colored) != set(layered_prediction(net.r, k).ids())
    ]
    return check_equal(mismatched, [], "Пошаговый процесс по уровням совпадает с формулой X_k")


def verify_pipeline(
    r: int,
    fields: Sequence[str] | None = None,
    config: AppConfig | None = None,
    with_bruteforce: bool = False,
    jobs: int | None = None,
) -> VerifyReport:
    """construct_S -> forcing -> rank per field -> certificate book -> self checks."""
    config = config or AppConfig()
    fields = list(fields or config.default_fields)
    mr_formula, z_formula = theorem_formulas(r)

    net = generate(r, config)
    s = construct_S(r, "layer")
    pt = propagation_time(net.graph, s)
    logger.info("BF(%d): |S|=%d, pt=%s", r, len(s), pt)

    ranks, skipped = _field_ranks(net, fields, config)

    library = CertificateLibrary(config=config, jobs=jobs or config.jobs)
    cert_count, certs_ok = 0, False
    try:
        book = library.get(r)
        cert_count, certs_ok = len(book.certs), avoids_s(book)
    except CertificateError as exc:
        logger.error("certificate check failed: %s", exc)

    brute = None
    if with_bruteforce:
        try:
            brute = brute_force_Z(
                net.graph,
                max_candidates=config.limits.search_max_candidates,
                max_seconds=config.limits.search_max_seconds,
            ).value
        except ResourceLimitError as exc:
            logger.warning("exhaustive Z search stopped: %s (excluded up to %s)", exc, exc.excluded_size)

    report = VerifyReport(
        r=r,
        n=net.n,
        s_size=len(s),
        z_formula=z_formula,
        forcing_ok=pt is not None and pt <= 2 * r,
        pt_observed=pt,
        rank_per_field=ranks,
        skipped_fields=skipped,
        mr_formula=mr_formula,
        rank_matches=bool(ranks) and all(v == mr_formula for v in ranks.values()),
        cert_count=cert_count,
        certs_ok=certs_ok,
        brute_force_z=brute,
    )
    ok, steps = self_check_report(report)
    layered = layered_step(net)
    report.steps = [layered, *steps]
    report.ok = ok and layered.ok
    return report


def bench(
    r_values: Iterable[int],
    fields: Sequence[str] | None = None,
    config: AppConfig | None = None,
) -> list[dict[str, Any]]:
    """Wall-clock seconds per stage for each r."""
    config = config or AppConfig()
    fields = list(fields or config.default_fields)
    rows = []
    for r in r_values:
        row: dict[str, Any] = {"r": r}
        started = time.monotonic()
        net = generate(r, config)
        row["generate"] = round(time.monotonic() - started, 4)

        started = time.monotonic()
        s = construct_S(r, "layer")
        row["construct_S"] = round(time.monotonic() - started, 4)

        started = time.monotonic()
        propagation_time(net.graph, s)
        row["closure"] = round(time.monotonic() - started, 4)

        for name in fields:
            tag = FieldTag.parse(name)
            if r > config.limits.rank_cap(tag.name):
                row[f"rank_{tag.name}"] = "skipped"
                continue
            started = time.monotonic()
            rank(adjacency_matrix(net, field=tag), config.memory_cap_bytes)
            row[f"rank_{tag.name}"] = round(time.monotonic() - started, 4)

        started = time.monotonic()
        CertificateLibrary(config=config).get(r)
        row["certificates"] = round(time.monotonic() - started, 4)
        rows.append(row)
        logger.info("bench r=%d: %s", r, row)
    return rows
