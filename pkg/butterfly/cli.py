from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from dotenv import load_dotenv
from pydantic import BaseModel

from butterfly.core.config import AppConfig
from butterfly.core.errors import CertificateError, DomainError, ResourceLimitError
from butterfly.core.models import format_table
from butterfly.utils.certificates import CertificateLibrary, lemma34_parts
from butterfly.utils.forcing import (
    brute_force_pt,
    brute_force_Z,
    closure,
    construct_S,
    jacobsthal,
    layered_closure,
    propagation_time,
)
from butterfly.utils.graph import Graph, VertexSet, load_graph, read_vertex_set, to_dot, write_edgelist
from butterfly.utils.linalg import ExactMatrix, FieldTag, rank, theorem_formulas
from butterfly.utils.network import adjacency_matrix, generate
from butterfly.utils.pipeline import bench, verify_pipeline
from butterfly.utils.power import brute_force_pd, pd_lower_bound, pd_report

logger = logging.getLogger("butterfly")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3


def _emit(payload: Any, pretty: bool) -> None:
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    if pretty and isinstance(payload, list) and payload and isinstance(payload[0], dict):
        print(format_table(payload))
    elif pretty and isinstance(payload, dict):
        width = max(len(k) for k in payload) if payload else 0
        for key, value in payload.items():
            print(f"{key.ljust(width)}  {value}")
    else:
        print(json.dumps(payload, ensure_ascii=False, indent=2))


def _graph_and_set(args: argparse.Namespace, config: AppConfig) -> tuple[Graph, VertexSet]:
    if args.graph:
        g = load_graph(args.graph)
        if not args.set:
            raise DomainError("--set is required together with --graph")
        return g, read_vertex_set(g.n, Path(args.set).read_text(encoding="utf-8"))
    if args.r is None:
        raise DomainError("give either -r or --graph")
    net = generate(args.r, config)
    if args.set:
        return net.graph, read_vertex_set(net.n, Path(args.set).read_text(encoding="utf-8"))
    return net.graph, construct_S(args.r, "layer")


def cmd_gen(args: argparse.Namespace, config: AppConfig) -> int:
    net = generate(args.r, config)
    if args.format == "matrix":
        sys.stdout.write(adjacency_matrix(net, args.ordering).to_text())
    elif args.format == "dot":
        labels = {v: f"{net.recursive_label(v)}" for v in range(net.n)} if args.ordering == "recursive" else None
        highlight = construct_S(args.r, "layer") if args.highlight_s else None
        sys.stdout.write(to_dot(net.graph, labels=labels, highlight=highlight))
    else:
        sys.stdout.write(write_edgelist(net.graph))
    return EXIT_OK


def _search_seconds(args: argparse.Namespace, config: AppConfig) -> float:
    return args.budget if args.budget is not None else config.limits.search_max_seconds


def _report_exhausted(exc: ResourceLimitError, pretty: bool) -> None:
    _emit({"status": "budget_exhausted", "excluded_size": exc.excluded_size}, pretty)


def cmd_zf(args: argparse.Namespace, config: AppConfig) -> int:
    if args.zf_command == "min":
        g = load_graph(args.graph) if args.graph else generate(args.r, config).graph
        search = brute_force_pt if args.pt else brute_force_Z
        try:
            result = search(
                g,
                max_candidates=config.limits.search_max_candidates,
                max_seconds=_search_seconds(args, config),
            )
        except ResourceLimitError as exc:
            _report_exhausted(exc, args.pretty)
            raise
        _emit(result, args.pretty)
        return EXIT_OK

    g, s = _graph_and_set(args, config)
    if args.zf_command == "closure":
        if args.layered:
            if args.r is None:
                raise DomainError("the level-scheduled process needs -r")
            trace = layered_closure(generate(args.r, config), s)
        else:
            trace = closure(g, s)
        if args.trace:
            Path(args.trace).write_text(trace.model_dump_json(indent=2), encoding="utf-8")
            logger.info("forcing trace written to %s", args.trace)
        _emit(trace, False)
        return EXIT_OK if trace.forcing else EXIT_FAILED

    pt = propagation_time(g, s)
    _emit({"size": len(s), "forcing": pt is not None, "pt": pt}, args.pretty)
    return EXIT_OK if pt is not None else EXIT_FAILED


def cmd_rank(args: argparse.Namespace, config: AppConfig) -> int:
    tag = FieldTag.parse(args.field)
    if args.graph:
        g = load_graph(args.graph)
        value = rank(ExactMatrix.from_graph(g, tag), config.memory_cap_bytes)
        _emit({"field": tag.name, "rank": value, "n": g.n}, args.pretty)
        return EXIT_OK
    if args.r > config.limits.rank_cap(tag.name):
        raise ResourceLimitError(f"rank over {tag.name} is capped at r={config.limits.rank_cap(tag.name)}")
    net = generate(args.r, config)
    value = rank(adjacency_matrix(net, args.ordering, tag), config.memory_cap_bytes)
    mr, _ = theorem_formulas(args.r)
    _emit({"r": args.r, "field": tag.name, "rank": value, "mr_formula": mr, "n": net.n}, args.pretty)
    return EXIT_OK if value == mr else EXIT_FAILED


def cmd_cert(args: argparse.Namespace, config: AppConfig) -> int:
    library = CertificateLibrary(cache_dir=args.cache_dir, config=config, jobs=args.jobs or config.jobs)
    book = library.get(args.r)
    if args.cert_command == "build":
        if args.out:
            Path(args.out).write_text(book.model_dump_json(indent=2), encoding="utf-8")
            logger.info("certificate book written to %s", args.out)
        if args.pretty or not args.out:
            rows = [{"target": c.target, "kplus": list(c.kplus), "kminus": list(c.kminus)} for c in book.certs]
            _emit(rows if args.pretty else book, args.pretty)
        return EXIT_OK

    try:
        cert = book.get(args.target)
    except KeyError:
        raise DomainError(f"row {args.target} is not indexed by S^({args.r})") from None
    payload: dict[str, Any] = cert.model_dump(mode="json")
    i = args.target - args.r * 2**args.r
    if args.r >= 3 and 1 <= i <= jacobsthal(args.r - 1):
        payload["parts"] = lemma34_parts(args.r, i, library).model_dump(mode="json")
    _emit(payload, args.pretty)
    return EXIT_OK


def cmd_pd(args: argparse.Namespace, config: AppConfig) -> int:
    if args.pd_command == "bound":
        _emit({"r": args.r, "lower_bound": pd_lower_bound(args.r)}, args.pretty)
        return EXIT_OK
    if args.pd_command == "check":
        g, s = _graph_and_set(args, config)
        report = pd_report(g, s)
        _emit(report, args.pretty)
        return EXIT_OK if report.is_power_dominating else EXIT_FAILED
    if args.graph:
        g, bound = load_graph(args.graph), None
    else:
        g, bound = generate(args.r, config).graph, pd_lower_bound(args.r)
    try:
        result = brute_force_pd(
            g,
            max_candidates=config.limits.search_max_candidates,
            max_seconds=_search_seconds(args, config),
            lower_bound=bound,
        )
    except ResourceLimitError as exc:
        _report_exhausted(exc, args.pretty)
        raise
    _emit(result, args.pretty)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, config: AppConfig) -> int:
    report = verify_pipeline(
        args.r,
        fields=args.field or None,
        config=config,
        with_bruteforce=args.bruteforce,
        jobs=args.jobs,
    )
    if args.pretty:
        rows = [
            {"check": step.description, "status": (step.data or {}).get("status", "-")}
            for step in report.steps
        ]
        print(format_table(rows))
        print(f"\nr={report.r} n={report.n} Z={report.z_formula} mr={report.mr_formula} ok={report.ok}")
    else:
        _emit(report, False)
    return EXIT_OK if report.ok else EXIT_FAILED


def cmd_bench(args: argparse.Namespace, config: AppConfig) -> int:
    _emit(bench(range(args.r_min, args.r_max + 1), args.field or None, config), args.pretty)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="butterfly",
        description="Zero forcing, minimum rank and power domination of butterfly networks.",
    )
    parser.add_argument("--pretty", action="store_true", help="Human-readable output instead of JSON.")
    parser.add_argument("--jobs", type=int, default=None, help="Worker processes for certificate checks.")
    parser.add_argument("--log-level", default=None, help="Override BUTTERFLY_LOG_LEVEL.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="Generate BF(r).")
    gen.add_argument("-r", type=int, required=True)
    gen.add_argument("--format", choices=["edgelist", "dot", "matrix"], default="edgelist")
    gen.add_argument("--ordering", choices=["layer", "recursive"], default="layer")
    gen.add_argument("--highlight-s", action="store_true", help="Fill the vertices of S^(r) in DOT output.")
    gen.set_defaults(handler=cmd_gen)

    zf = sub.add_parser("zf", help="Zero forcing.")
    zf_sub = zf.add_subparsers(dest="zf_command", required=True)
    for name in ("closure", "check", "min"):
        cmd = zf_sub.add_parser(name)
        cmd.add_argument("-r", type=int, default=None)
        cmd.add_argument("--graph", type=Path, default=None, help="Edge-list file.")
        if name != "min":
            cmd.add_argument("--set", type=Path, default=None, help="Vertex ids; S^(r) when omitted.")
        if name == "closure":
            cmd.add_argument("--layered", action="store_true", help="Level-scheduled process.")
        if name == "closure":
            cmd.add_argument("--trace", type=Path, default=None, help="Also write the trace as JSON.")
        if name == "min":
            cmd.add_argument("--pt", action="store_true", help="Also minimise propagation time.")
            cmd.add_argument("--budget", type=float, default=None, help="Search time limit in seconds.")
    zf.set_defaults(handler=cmd_zf)

    rk = sub.add_parser("rank", help="Exact rank of A_r.")
    rk_source = rk.add_mutually_exclusive_group(required=True)
    rk_source.add_argument("-r", type=int, default=None)
    rk_source.add_argument("--graph", type=Path, default=None, help="Edge-list file.")
    rk.add_argument("--field", default="gf2")
    rk.add_argument("--ordering", choices=["layer", "recursive"], default="recursive")
    rk.set_defaults(handler=cmd_rank)

    cert = sub.add_parser("cert", help="Row-dependence certificates.")
    cert_sub = cert.add_subparsers(dest="cert_command", required=True)
    build = cert_sub.add_parser("build")
    build.add_argument("-r", type=int, required=True)
    build.add_argument("--out", type=Path, default=None)
    build.add_argument("--cache-dir", type=Path, default=None)
    show = cert_sub.add_parser("show")
    show.add_argument("-r", type=int, required=True)
    show.add_argument("--target", type=int, required=True)
    show.add_argument("--cache-dir", type=Path, default=None)
    cert.set_defaults(handler=cmd_cert)

    pd = sub.add_parser("pd", help="Power domination.")
    pd_sub = pd.add_subparsers(dest="pd_command", required=True)
    bound = pd_sub.add_parser("bound")
    bound.add_argument("-r", type=int, required=True)
    check = pd_sub.add_parser("check")
    check.add_argument("-r", type=int, default=None)
    check.add_argument("--graph", type=Path, default=None)
    check.add_argument("--set", type=Path, default=None)
    pd_min = pd_sub.add_parser("min")
    pd_min.add_argument("-r", type=int, default=None)
    pd_min.add_argument("--graph", type=Path, default=None)
    pd_min.add_argument("--budget", type=float, default=None, help="Search time limit in seconds.")
    pd.set_defaults(handler=cmd_pd)

    verify = sub.add_parser("verify", help="Check n - Z = mr = rank for one r.")
    verify.add_argument("-r", type=int, required=True)
    verify.add_argument("--field", action="append", help="Repeatable; defaults to BUTTERFLY_DEFAULT_FIELDS.")
    verify.add_argument("--bruteforce", action="store_true", help="Also search Z exhaustively.")
    verify.set_defaults(handler=cmd_verify)

    bn = sub.add_parser("bench", help="Stage timings.")
    bn.add_argument("--r-min", type=int, default=1)
    bn.add_argument("--r-max", type=int, default=8)
    bn.add_argument("--field", action="append")
    bn.set_defaults(handler=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    config = AppConfig()
    logging.basicConfig(
        level=(args.log_level or config.log_level).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.command in ("zf", "pd") and getattr(args, "graph", None) is None and getattr(args, "r", None) is None:
        print("error: give either -r or --graph", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.handler(args, config)
    except CertificateError as exc:
        logger.error("%s", exc)
        return EXIT_FAILED
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
