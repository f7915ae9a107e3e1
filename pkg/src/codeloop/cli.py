"""Command-line front end.

Subcommands: search, solve, bench, corpus-validate. Exit codes partition
outcomes: 0 success/solved, 1 unsolved or domain failure, 2 usage error,
3 infrastructure failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import resolve_config
from .corpus import CorpusEntry, load_corpus
from .embedding import HashingEmbedder, RemoteEmbeddingProvider
from .errors import BackendError, CodeloopError, CorpusError, ProviderError, SandboxSetupError
from .llm_client import HttpCompletionBackend, ScriptedBackend
from .pipeline import (
    ALL_SCENARIOS,
    PipelineConfig,
    SamplingConfig,
    Scenario,
    Status,
    run_benchmark,
    solve_task,
)
from .reporting import (
    aggregate_report,
    build_manifest,
    render_solved_chart,
    render_summary_table,
    write_outcomes,
)
from .retriever import Retriever, SimilarityStrategy
from .sandbox import ResourceLimits

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2
EXIT_INFRA = 3

_STRATEGY_NAMES = {"token": "token-jaccard", "embedding": "embedding-cosine"}


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="YAML config file")
    parser.add_argument("--corpus", help="corpus file (newline-delimited records)")
    parser.add_argument("--strategy", choices=("token", "embedding"))
    parser.add_argument("--k", type=int, help="number of retrieved demonstrations")
    parser.add_argument("--embed-endpoint", help="remote embedding endpoint URL")
    parser.add_argument("--embed-dim", type=int, help="remote embedding dimension")


def _add_backend_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--backend", choices=("http", "scripted"))
    parser.add_argument("--script", help="scripted-backend script file")
    parser.add_argument("--endpoint", help="chat-completion endpoint URL")
    parser.add_argument("--model", help="model name for the HTTP backend")
    parser.add_argument("--max-repair-rounds", type=int)
    parser.add_argument("--timeout-secs", type=float, help="sandbox wall-clock limit")
    parser.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="codeloop",
        description="Search-generate-repair automatic programming pipeline",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_search = sub.add_parser("search", help="rank corpus entries by similarity to a query")
    p_search.add_argument("query")
    _add_common_flags(p_search)

    p_solve = sub.add_parser("solve", help="run one task through the pipeline")
    _add_common_flags(p_solve)
    _add_backend_flags(p_solve)
    p_solve.add_argument("--task-id", help="solve this corpus entry")
    p_solve.add_argument("--requirement", help="inline requirement text")
    p_solve.add_argument("--test", action="append", default=None, help="inline test (repeatable)")
    p_solve.add_argument(
        "--scenario", choices=[s.value for s in ALL_SCENARIOS], default=None
    )

    p_bench = sub.add_parser("bench", help="run the ablation benchmark")
    _add_common_flags(p_bench)
    _add_backend_flags(p_bench)
    p_bench.add_argument(
        "--scenario",
        action="append",
        choices=[s.value for s in ALL_SCENARIOS],
        help="scenario to run (repeatable; default: all four)",
    )
    p_bench.add_argument("--out", required=True, help="output directory for reports")
    p_bench.add_argument("--max-infra-failures", type=int, default=None)

    p_validate = sub.add_parser("corpus-validate", help="validate a corpus file")
    _add_common_flags(p_validate)

    return parser


def _resolved(args: argparse.Namespace) -> dict:
    overrides = {
        "retrieval": {
            "k": getattr(args, "k", None),
            "strategy": getattr(args, "strategy", None),
        },
        "embedding": {
            "endpoint": getattr(args, "embed_endpoint", None),
            "dim": getattr(args, "embed_dim", None),
        },
        "repair": {"max_rounds": getattr(args, "max_repair_rounds", None)},
        "sandbox": {"timeout_secs": getattr(args, "timeout_secs", None)},
        "workers": getattr(args, "workers", None),
        "backend": {
            "kind": getattr(args, "backend", None),
            "endpoint": getattr(args, "endpoint", None),
            "model": getattr(args, "model", None),
            "script": getattr(args, "script", None),
        },
        "max_infra_failures": getattr(args, "max_infra_failures", None),
    }
    return resolve_config(getattr(args, "config", None), overrides)


def _make_strategy(cfg: dict) -> SimilarityStrategy:
    kind = _STRATEGY_NAMES[cfg["retrieval"]["strategy"]]
    if kind == "token-jaccard":
        return SimilarityStrategy(kind=kind)
    embed_cfg = cfg["embedding"]
    if embed_cfg.get("endpoint"):
        provider = RemoteEmbeddingProvider(
            endpoint=embed_cfg["endpoint"], dim=int(embed_cfg["dim"])
        )
    else:
        provider = HashingEmbedder(dim=int(embed_cfg["dim"]))
    return SimilarityStrategy(kind=kind, provider=provider)


def _make_backend(cfg: dict):
    backend_cfg = cfg["backend"]
    if backend_cfg["kind"] == "scripted":
        if not backend_cfg.get("script"):
            raise CodeloopError("scripted backend requires --script")
        return ScriptedBackend.from_file(backend_cfg["script"])
    if not backend_cfg.get("endpoint") or not backend_cfg.get("model"):
        raise CodeloopError("http backend requires --endpoint and --model")
    return HttpCompletionBackend(
        endpoint=backend_cfg["endpoint"], model=backend_cfg["model"]
    )


def _make_pipeline_config(cfg: dict, scenario: Scenario) -> PipelineConfig:
    limits_kwargs = {"wall_clock_secs": float(cfg["sandbox"]["timeout_secs"])}
    if cfg["sandbox"].get("interpreter"):
        limits_kwargs["interpreter"] = cfg["sandbox"]["interpreter"]
    if cfg["sandbox"].get("temp_root"):
        limits_kwargs["temp_root"] = cfg["sandbox"]["temp_root"]
    return PipelineConfig(
        scenario=scenario,
        retrieval_k=int(cfg["retrieval"]["k"]),
        strategy=_make_strategy(cfg),
        max_repair_rounds=int(cfg["repair"]["max_rounds"]),
        sampling=SamplingConfig(
            max_tokens=int(cfg["sampling"]["max_tokens"]),
            temperature=float(cfg["sampling"]["temperature"]),
        ),
        limits=ResourceLimits(**limits_kwargs),
        worker_count=int(cfg["workers"]),
    )


def cmd_search(args: argparse.Namespace) -> int:
    cfg = _resolved(args)
    if not cfg.get("corpus") and not args.corpus:
        print("error: --corpus is required", file=sys.stderr)
        return EXIT_USAGE
    corpus = load_corpus(args.corpus or cfg["corpus"])
    retriever = Retriever(strategy=_make_strategy(cfg))
    k = int(cfg["retrieval"]["k"])
    hits = retriever.search(args.query, corpus, max(k, 1))
    for hit in hits:
        print(f"{hit.entry.task_id}\t{hit.score:.6f}\t{hit.entry.requirement}")
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    cfg = _resolved(args)
    scenario = Scenario(args.scenario) if args.scenario else Scenario.GENERATE_ONLY

    if args.task_id:
        if not args.corpus:
            print("error: --task-id requires --corpus", file=sys.stderr)
            return EXIT_USAGE
        corpus = load_corpus(args.corpus)
        task = corpus.get(args.task_id)
    else:
        if not args.requirement or not args.test:
            print("error: provide --task-id or --requirement with --test", file=sys.stderr)
            return EXIT_USAGE
        task = CorpusEntry(
            task_id="inline",
            requirement=args.requirement,
            solution_code="",
            test_list=tuple(args.test),
        )
        corpus = load_corpus(args.corpus) if args.corpus else None

    if scenario.includes_search and corpus is None:
        print("error: search scenarios require --corpus", file=sys.stderr)
        return EXIT_USAGE

    backend = _make_backend(cfg)
    pipeline_config = _make_pipeline_config(cfg, scenario)
    from .corpus import Corpus

    retrieval = corpus if corpus is not None else Corpus(entries=(), source_path="<none>")
    outcome = solve_task(task, retrieval, pipeline_config, backend)

    if outcome.status == Status.INFRASTRUCTURE_FAILURE:
        print(f"infrastructure failure: {outcome.error}", file=sys.stderr)
        return EXIT_INFRA
    if outcome.solved:
        print(f"status: {outcome.status.value}")
        print(outcome.attempts[-1].candidate.source)
        return EXIT_OK
    print("status: unsolved", file=sys.stderr)
    for i, attempt in enumerate(outcome.attempts):
        print(
            f"attempt {i} [{attempt.candidate.label()}]: {attempt.report.verdict.value}"
            + (
                f" at test {attempt.report.failing_test_index}"
                if attempt.report.failing_test_index is not None
                else ""
            ),
            file=sys.stderr,
        )
        if attempt.report.message:
            print(attempt.report.message, file=sys.stderr)
    return EXIT_DOMAIN


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = _resolved(args)
    if not args.corpus:
        print("error: --corpus is required", file=sys.stderr)
        return EXIT_USAGE
    corpus = load_corpus(args.corpus)
    scenario_names = args.scenario or [s.value for s in ALL_SCENARIOS]
    scenarios = [Scenario(name) for name in scenario_names]
    backend = _make_backend(cfg)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    reports = []
    try:
        for scenario in scenarios:
            pipeline_config = _make_pipeline_config(cfg, scenario)
            report = run_benchmark(corpus, pipeline_config, backend)
            reports.append(report)
            # flush per scenario so interruptions keep partial results
            write_outcomes(report.outcomes, out_dir / f"outcomes_{scenario.value}.jsonl")
    finally:
        if reports:
            manifest = build_manifest(
                _make_pipeline_config(cfg, reports[0].scenario),
                args.corpus,
                backend.backend_id,
            )
            aggregate = aggregate_report(reports, manifest)
            (out_dir / "report.json").write_text(
                json.dumps(aggregate, indent=2, ensure_ascii=False) + "\n",
                encoding="utf-8",
            )
            (out_dir / "manifest.json").write_text(
                json.dumps(manifest.to_dict(), indent=2, ensure_ascii=False) + "\n",
                encoding="utf-8",
            )
            render_solved_chart(aggregate, out_dir / "solved_by_scenario.png")
            print(render_summary_table(aggregate))

    infra_total = sum(r.infrastructure_failures for r in reports)
    if infra_total > int(cfg["max_infra_failures"]):
        print(
            f"error: {infra_total} infrastructure failures exceed the allowed "
            f"{cfg['max_infra_failures']}",
            file=sys.stderr,
        )
        return EXIT_INFRA
    return EXIT_OK


def cmd_corpus_validate(args: argparse.Namespace) -> int:
    if not args.corpus:
        print("error: --corpus is required", file=sys.stderr)
        return EXIT_USAGE
    corpus = load_corpus(args.corpus)
    with_tests = sum(1 for e in corpus if e.test_list)
    print(f"{len(corpus)} entries OK ({with_tests} with tests): {args.corpus}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "search": cmd_search,
        "solve": cmd_solve,
        "bench": cmd_bench,
        "corpus-validate": cmd_corpus_validate,
    }
    try:
        return handlers[args.command](args)
    except (CorpusError, ProviderError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (BackendError, SandboxSetupError) as exc:
        print(f"infrastructure failure: {exc}", file=sys.stderr)
        return EXIT_INFRA
    except CodeloopError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
