"""Report schemas, run manifests, summary rendering and figures.

Per-task outcomes are emitted as newline-delimited JSON records and the
aggregate as one JSON object; both carry a schema_version. Reports from
runs with equal manifests and a deterministic backend are comparable
byte-for-byte once duration/latency/timestamp fields are ignored.
"""

from __future__ import annotations

import datetime as dt
import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .pipeline import (
    BenchmarkReport,
    PipelineConfig,
    Scenario,
    Status,
    TaskOutcome,
    improvement_percent,
)
from .prompting import template_digests

SCHEMA_VERSION = "1"

# fields that vary between otherwise identical runs
VOLATILE_FIELDS = ("duration", "latency", "timestamp")


def file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass(frozen=True)
class RunManifest:
    config: dict
    corpus_digest: str
    backend_id: str
    template_digests: dict[str, str]
    timestamp: str

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, **asdict(self)}


def config_snapshot(config: PipelineConfig) -> dict:
    snap = {
        "scenario": config.scenario.value,
        "retrieval_k": config.retrieval_k,
        "strategy": config.strategy.kind,
        "max_repair_rounds": config.max_repair_rounds,
        "sampling": {
            "max_tokens": config.sampling.max_tokens,
            "temperature": config.sampling.temperature,
        },
        "limits": {
            "wall_clock_secs": config.limits.wall_clock_secs,
            "interpreter": config.limits.interpreter,
        },
        "worker_count": config.worker_count,
    }
    return snap


def build_manifest(
    config: PipelineConfig, corpus_path: str | Path, backend_id: str
) -> RunManifest:
    return RunManifest(
        config=config_snapshot(config),
        corpus_digest=file_digest(corpus_path),
        backend_id=backend_id,
        template_digests=template_digests(),
        timestamp=dt.datetime.now(dt.timezone.utc).isoformat(),
    )


def outcome_record(outcome: TaskOutcome) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "task_id": outcome.task_id,
        "scenario": outcome.scenario.value,
        "status": outcome.status.value,
        "repair_round": outcome.repair_round,
        "repair_budget": outcome.repair_budget,
        "hits_used": list(outcome.hits_used),
        "error": outcome.error,
        "attempts": [
            {
                "origin": a.candidate.origin,
                "round": a.candidate.repair_round,
                "source": a.candidate.source,
                "verdict": a.report.verdict.value,
                "failing_test_index": a.report.failing_test_index,
                "message": a.report.message,
                "duration": a.report.duration,
                "prompt_sha256": a.prompt_digest,
            }
            for a in outcome.attempts
        ],
    }


def write_outcomes(outcomes: Sequence[TaskOutcome], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for outcome in outcomes:
            fh.write(json.dumps(outcome_record(outcome), ensure_ascii=False) + "\n")


def read_outcomes(path: str | Path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(json.loads(line))
    return records


def aggregate_report(
    reports: Sequence[BenchmarkReport], manifest: RunManifest
) -> dict:
    """One aggregate object covering every scenario in the run. Contains
    everything needed to recompute a solved-counts bar chart."""
    baseline = next(
        (r for r in reports if r.scenario == Scenario.GENERATE_ONLY), None
    )
    rows = []
    for report in reports:
        row = {
            "scenario": report.scenario.value,
            "total": report.total,
            "solved": report.solved,
            "solve_rate": report.solve_rate,
            "status_counts": report.status_counts(),
            "solved_after_repair_by_round": {
                str(k): v for k, v in sorted(report.repair_round_counts().items())
            },
            "infrastructure_failures": report.infrastructure_failures,
            "solved_task_ids": [o.task_id for o in report.outcomes if o.solved],
        }
        if baseline is not None and baseline.solved > 0:
            row["improvement_vs_generate_only_percent"] = round(
                improvement_percent(report.solved, baseline.solved), 2
            )
        rows.append(row)
    return {
        "schema_version": SCHEMA_VERSION,
        "scenarios": rows,
        "manifest": manifest.to_dict(),
    }


def render_summary_table(aggregate: dict) -> str:
    header = f"{'scenario':<26} {'solved':>6} {'total':>6} {'rate':>8} {'improvement':>12} {'infra':>6}"
    lines = [header, "-" * len(header)]
    for row in aggregate["scenarios"]:
        improvement = row.get("improvement_vs_generate_only_percent")
        imp = f"{improvement:+.2f}%" if improvement is not None else "-"
        lines.append(
            f"{row['scenario']:<26} {row['solved']:>6} {row['total']:>6} "
            f"{row['solve_rate']*100:>7.2f}% {imp:>12} {row['infrastructure_failures']:>6}"
        )
    return "\n".join(lines)


def render_solved_chart(aggregate: dict, path: str | Path) -> None:
    """Bar chart of solved counts per scenario, written next to the reports."""
    rows = aggregate["scenarios"]
    labels = [r["scenario"] for r in rows]
    solved = [r["solved"] for r in rows]
    totals = [r["total"] for r in rows]
    fig, ax = plt.subplots(figsize=(8, 4.5))
    bars = ax.bar(range(len(rows)), solved, color="#4878d0")
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels(labels, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel("tasks solved")
    ax.set_ylim(0, max(totals) if totals else 1)
    ax.set_title("Solved tasks per scenario")
    for bar, count in zip(bars, solved):
        ax.text(
            bar.get_x() + bar.get_width() / 2,
            bar.get_height(),
            str(count),
            ha="center",
            va="bottom",
            fontsize=8,
        )
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def strip_volatile(obj):
    """Recursively drop duration/latency/timestamp fields (for run-to-run
    comparison of otherwise deterministic reports)."""
    if isinstance(obj, dict):
        return {
            k: strip_volatile(v) for k, v in obj.items() if k not in VOLATILE_FIELDS
        }
    if isinstance(obj, list):
        return [strip_volatile(v) for v in obj]
    return obj
