"""Command-line interface.

Subcommands: analyze one incident, export its causality graph, validate a
rule set against a labeled corpus, benchmark all approaches, and simulate a
synthetic corpus. Exit codes are a stable contract: 0 success, 1 input
error, 2 empty result, 3 validation-floor failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import documents, export, report
from .baselines import SeverityConfig, naive_rank
from .errors import RcaError
from .evaluate import evaluate_standard, frequency_table_from_corpus
from .ranking import (
    DEFAULT_RADIUS,
    EngineConfig,
    FrequencyTable,
    RankParams,
    analyze_incident,
)
from .rules import validate_rules
from .simulate import (
    BUSINESS_DOMAIN,
    SERVICE_BASED,
    SimulationParams,
    generate_corpus,
    standard_catalog,
    standard_rules,
)

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_EMPTY_RESULT = 2
EXIT_FLOOR_FAILED = 3


def _add_engine_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--rules", help="rule document (JSON list)")
    parser.add_argument("--catalog", help="event-type catalog document")
    parser.add_argument("--graph", help="global dependency graph document")
    parser.add_argument("--frequencies", help="historical root-cause frequency table")
    parser.add_argument("--radius", type=int, default=DEFAULT_RADIUS, help="subgraph radius")
    parser.add_argument("--alpha", type=float, default=0.85, help="damping factor")
    parser.add_argument("--fn", type=float, default=0.5, help="teleport mass of non-dangling events")
    parser.add_argument("--max-iter", type=int, default=100, help="power iteration cap")
    parser.add_argument("--tol", type=float, default=1e-8, help="L1 convergence tolerance")


def _params(args: argparse.Namespace) -> RankParams:
    return RankParams(f_n=args.fn, alpha=args.alpha, max_iter=args.max_iter, tol=args.tol)


def _load_inputs(args: argparse.Namespace):
    if not args.catalog:
        raise RcaError("--catalog is required")
    catalog = documents.load_catalog(args.catalog)
    rules = documents.load_rules(args.rules, catalog) if args.rules else []
    graph = documents.load_global_graph(args.graph) if args.graph else None
    frequencies = (
        documents.load_frequency_table(args.frequencies)
        if args.frequencies
        else FrequencyTable.empty()
    )
    return catalog, rules, graph, frequencies


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def cmd_analyze(args: argparse.Namespace) -> int:
    catalog, rules, graph, frequencies = _load_inputs(args)
    incident = documents.load_incident(args.incident, catalog, snapshot=graph)

    if args.approach == "naive":
        services = naive_rank(incident, SeverityConfig(), _params(args), args.radius)
        if not services:
            print("no services scored", file=sys.stderr)
            return EXIT_EMPTY_RESULT
        if args.format == "structured":
            doc = {
                "granularity": "service",
                "entries": [
                    {"rank": i, "service": s, "score": score}
                    for i, (s, score) in enumerate(services, start=1)
                ],
            }
            _emit(json.dumps(doc, indent=2, sort_keys=True), args.out)
        else:
            _emit(export.services_to_table(services), args.out)
        return EXIT_OK

    if args.approach == "non_adaptive":
        from .baselines import downgrade_rules

        rules = downgrade_rules(rules)
    result = analyze_incident(
        incident, rules, catalog, _params(args), frequencies, args.radius
    )
    if not result.ranking.entries:
        print("analysis produced an empty ranking", file=sys.stderr)
        return EXIT_EMPTY_RESULT
    if args.format == "structured":
        _emit(
            json.dumps(
                export.ranked_to_document(result.ranking, result.ecg), indent=2, sort_keys=True
            ),
            args.out,
        )
    elif args.format == "dot":
        _emit(export.ecg_to_dot(result.ecg), args.out)
    else:
        _emit(export.ranked_to_table(result.ranking, result.ecg), args.out)
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    catalog, rules, graph, frequencies = _load_inputs(args)
    incident = documents.load_incident(args.incident, catalog, snapshot=graph)
    result = analyze_incident(
        incident, rules, catalog, _params(args), frequencies, args.radius
    )
    if args.format == "dot":
        _emit(export.ecg_to_dot(result.ecg), args.out)
    else:
        _emit(
            json.dumps(export.ecg_to_document(result.ecg), indent=2, sort_keys=True), args.out
        )
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    explicit = documents.load_catalog(args.catalog) if args.catalog else None
    catalog, corpus_rules, names, corpus = documents.load_corpus(args.corpus, catalog=explicit)
    if args.rules:
        rules = documents.load_rules(args.rules, catalog)
    elif corpus_rules is not None:
        rules = corpus_rules
    else:
        raise RcaError("no --rules given and the corpus manifest names none")
    frequencies = (
        documents.load_frequency_table(args.frequencies)
        if args.frequencies
        else FrequencyTable.empty()
    )
    config = EngineConfig(
        catalog=catalog, params=_params(args), radius=args.radius, frequencies=frequencies
    )
    result = validate_rules(rules, corpus, config)

    baseline = None
    if args.diff_rules:
        baseline = validate_rules(documents.load_rules(args.diff_rules, catalog), corpus, config)

    if args.format == "structured":
        doc: dict = {
            "total": result.total,
            "top1": result.top1,
            "top3": result.top3,
            "ranks": [
                {"incident": names[i], "label_rank": rank}
                for i, rank in enumerate(result.ranks)
            ],
        }
        if baseline is not None:
            doc["baseline"] = {"top1": baseline.top1, "top3": baseline.top3}
            for i, entry in enumerate(doc["ranks"]):
                entry["baseline_rank"] = baseline.ranks[i]
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(f"incidents: {result.total}")
        print(f"top-1 accuracy: {result.top1:.1%}")
        print(f"top-3 accuracy: {result.top3:.1%}")
        if baseline is not None:
            print(f"diff rules top-1: {baseline.top1:.1%}, top-3: {baseline.top3:.1%}")
            for i, name in enumerate(names):
                new, old = result.ranks[i], baseline.ranks[i]
                if new != old:
                    print(f"  {name}: rank {old} -> {new}")

    if args.report_dir:
        for path in report.write_validation_report(result, args.report_dir, names, baseline):
            print(f"wrote {path}", file=sys.stderr)

    if args.floor is not None and result.top3 < args.floor:
        print(
            f"top-3 accuracy {result.top3:.1%} fell below the floor {args.floor:.1%}",
            file=sys.stderr,
        )
        return EXIT_FLOOR_FAILED
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    if args.corpus:
        explicit = documents.load_catalog(args.catalog) if args.catalog else None
        catalog, corpus_rules, _, corpus = documents.load_corpus(args.corpus, catalog=explicit)
        if args.rules:
            rules = documents.load_rules(args.rules, catalog)
        elif corpus_rules is not None:
            rules = corpus_rules
        else:
            raise RcaError("no --rules given and the corpus manifest names none")
    else:
        catalog = documents.load_catalog(args.catalog) if args.catalog else standard_catalog()
        rules = documents.load_rules(args.rules, catalog) if args.rules else standard_rules(catalog)
        params = SimulationParams(
            service_count=args.services,
            edge_density=args.density,
            event_noise_rate=args.noise_rate,
            chain_length=args.chain_length,
            seed=args.seed,
            domain_mix={
                BUSINESS_DOMAIN: args.business_fraction,
                SERVICE_BASED: 1.0 - args.business_fraction,
            },
        )
        _, rules, catalog, corpus = generate_corpus(params, args.count, catalog, rules)
        frequencies = (
            documents.load_frequency_table(args.frequencies)
            if args.frequencies
            else FrequencyTable.empty()
        )

    if not args.frequencies:
        frequencies = frequency_table_from_corpus(corpus)
    config = EngineConfig(
        catalog=catalog, params=_params(args), radius=args.radius, frequencies=frequencies
    )
    result = evaluate_standard(rules, corpus, config, workers=args.workers)
    if args.format == "structured":
        print(json.dumps(result.to_document(include_runtime=not args.no_timing),
                         indent=2, sort_keys=True))
    else:
        print(result.to_table(include_runtime=not args.no_timing))
        for note in result.notes:
            print(f"note: {note}")
    if args.report_dir:
        for path in report.write_bench_report(result, args.report_dir):
            print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    params = SimulationParams(
        service_count=args.services,
        edge_density=args.density,
        event_noise_rate=args.noise_rate,
        chain_length=args.chain_length,
        seed=args.seed,
        domain_mix={
            BUSINESS_DOMAIN: args.business_fraction,
            SERVICE_BASED: 1.0 - args.business_fraction,
        },
    )
    catalog = documents.load_catalog(args.catalog) if args.catalog else standard_catalog()
    rules = documents.load_rules(args.rules, catalog) if args.rules else standard_rules(catalog)
    _, rules, catalog, corpus = generate_corpus(params, args.count, catalog, rules)
    manifest = documents.write_corpus(args.out, corpus, catalog, rules)
    print(f"wrote {len(corpus)} incidents to {manifest.parent}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eventrca",
        description="Event-graph root cause analysis for microservice incidents",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="rank root causes for one incident")
    _add_engine_flags(analyze)
    analyze.add_argument("--incident", required=True, help="incident document")
    analyze.add_argument(
        "--approach",
        choices=["groot", "naive", "non_adaptive"],
        default="groot",
        help="ranking approach",
    )
    analyze.add_argument("--format", choices=["table", "structured", "dot"], default="table")
    analyze.add_argument("--out", help="write output to a file instead of stdout")
    analyze.set_defaults(fn_command=cmd_analyze)

    exp = sub.add_parser("export", help="export the event causality graph")
    _add_engine_flags(exp)
    exp.add_argument("--incident", required=True, help="incident document")
    exp.add_argument("--format", choices=["structured", "dot"], default="structured")
    exp.add_argument("--out", help="write output to a file instead of stdout")
    exp.set_defaults(fn_command=cmd_export)

    validate = sub.add_parser("validate", help="validate a rule set against a labeled corpus")
    _add_engine_flags(validate)
    validate.add_argument("--corpus", required=True, help="corpus directory with manifest.json")
    validate.add_argument("--floor", type=float, help="minimum acceptable top-3 accuracy")
    validate.add_argument("--diff-rules", help="second rule document to diff against")
    validate.add_argument("--format", choices=["table", "structured"], default="table")
    validate.add_argument("--report-dir", help="write CSV and figures here")
    validate.set_defaults(fn_command=cmd_validate)

    bench = sub.add_parser("bench", help="compare all approaches on a corpus")
    _add_engine_flags(bench)
    bench.add_argument("--corpus", help="corpus directory (otherwise simulate)")
    bench.add_argument("--count", type=int, default=200, help="simulated incident count")
    bench.add_argument("--services", type=int, default=50)
    bench.add_argument("--density", type=float, default=0.05)
    bench.add_argument("--noise-rate", type=float, default=0.0)
    bench.add_argument("--chain-length", type=int, default=2)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--business-fraction", type=float, default=0.5)
    bench.add_argument("--workers", type=int, default=1, help="evaluation worker threads")
    bench.add_argument("--format", choices=["table", "structured"], default="table")
    bench.add_argument("--no-timing", action="store_true", help="omit wall-clock columns")
    bench.add_argument("--report-dir", help="write CSV and figures here")
    bench.set_defaults(fn_command=cmd_bench)

    simulate = sub.add_parser("simulate", help="write a synthetic labeled corpus")
    simulate.add_argument("--out", required=True, help="corpus output directory")
    simulate.add_argument("--catalog", help="event-type catalog (default: bundled)")
    simulate.add_argument("--rules", help="rule document (default: bundled)")
    simulate.add_argument("--count", type=int, default=200)
    simulate.add_argument("--services", type=int, default=50)
    simulate.add_argument("--density", type=float, default=0.05)
    simulate.add_argument("--noise-rate", type=float, default=0.0)
    simulate.add_argument("--chain-length", type=int, default=2)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--business-fraction", type=float, default=0.5)
    simulate.set_defaults(fn_command=cmd_simulate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn_command(args)
    except RcaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
