"""Orchestration: search, generate, test, repair.

``solve_task`` drives one task through a configured scenario and logs
every attempt. ``run_benchmark`` maps it over a corpus with a bounded
worker pool. Backend and sandbox-setup failures are an explicit
infrastructure-failure outcome, never silently counted as unsolved.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from .corpus import Corpus, CorpusEntry, leave_one_out_view
from .errors import BackendError, CodeloopError, ProviderError, SandboxSetupError
from .llm_client import CompletionBackend, CompletionRequest, extract_code
from .prompting import build_generation_prompt, build_repair_prompt
from .retriever import Retriever, RetrievalHit, SimilarityStrategy, default_strategy
from .sandbox import CandidateProgram, ResourceLimits, Sandbox, TestReport, Verdict


class Scenario(enum.Enum):
    GENERATE_ONLY = "generate-only"
    SEARCH_GENERATE = "search-generate"
    GENERATE_REPAIR = "generate-repair"
    SEARCH_GENERATE_REPAIR = "search-generate-repair"

    @property
    def includes_search(self) -> bool:
        return self in (Scenario.SEARCH_GENERATE, Scenario.SEARCH_GENERATE_REPAIR)

    @property
    def includes_repair(self) -> bool:
        return self in (Scenario.GENERATE_REPAIR, Scenario.SEARCH_GENERATE_REPAIR)


ALL_SCENARIOS = tuple(Scenario)


@dataclass(frozen=True)
class SamplingConfig:
    max_tokens: int = 512
    temperature: float = 0.0


@dataclass(frozen=True)
class PipelineConfig:
    scenario: Scenario
    retrieval_k: int = 1
    strategy: SimilarityStrategy = field(
        default_factory=lambda: default_strategy("token-jaccard")
    )
    max_repair_rounds: int = 1
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    limits: ResourceLimits = field(default_factory=ResourceLimits)
    worker_count: int = 4

    @property
    def effective_repair_rounds(self) -> int:
        return self.max_repair_rounds if self.scenario.includes_repair else 0


class Status(enum.Enum):
    SOLVED_AT_GENERATION = "solved-at-generation"
    SOLVED_AFTER_REPAIR = "solved-after-repair"
    UNSOLVED = "unsolved"
    INFRASTRUCTURE_FAILURE = "infrastructure-failure"


@dataclass(frozen=True)
class Attempt:
    candidate: CandidateProgram
    report: TestReport
    prompt_digest: str


@dataclass(frozen=True)
class TaskOutcome:
    task_id: str
    scenario: Scenario
    status: Status
    repair_round: int | None  # set iff solved after repair
    attempts: tuple[Attempt, ...]
    hits_used: tuple[str, ...]
    repair_budget: int
    error: str | None = None

    @property
    def solved(self) -> bool:
        return self.status in (Status.SOLVED_AT_GENERATION, Status.SOLVED_AFTER_REPAIR)


def solve_task(
    task: CorpusEntry,
    retrieval_corpus: Corpus,
    config: PipelineConfig,
    backend: CompletionBackend,
    retriever: Retriever | None = None,
    sandbox: Sandbox | None = None,
) -> TaskOutcome:
    if not task.test_list:
        raise ValueError(f"task {task.task_id} has no tests")
    retriever = retriever or Retriever(strategy=config.strategy)
    sandbox = sandbox or Sandbox(limits=config.limits)
    budget = config.effective_repair_rounds

    def request(prompt: str) -> CompletionRequest:
        return CompletionRequest(
            prompt=prompt,
            max_tokens=config.sampling.max_tokens,
            temperature=config.sampling.temperature,
        )

    attempts: list[Attempt] = []
    try:
        hits: list[RetrievalHit] = []
        if config.scenario.includes_search:
            view = (
                leave_one_out_view(retrieval_corpus, task.task_id)
                if task.task_id in retrieval_corpus.task_ids()
                else retrieval_corpus
            )
            hits = retriever.search(task.requirement, view, config.retrieval_k)

        gen_prompt = build_generation_prompt(hits, task.requirement, task.test_list)
        completion = backend.complete(request(gen_prompt.rendered))
        candidate = CandidateProgram(
            source=extract_code(completion.text), task_id=task.task_id
        )
        report = sandbox.run(candidate, task.test_list)
        attempts.append(Attempt(candidate, report, gen_prompt.digest))

        if report.verdict == Verdict.PASS:
            return _outcome(task, config, Status.SOLVED_AT_GENERATION, None, attempts, hits, budget)

        for round_no in range(1, budget + 1):
            rep_prompt = build_repair_prompt(
                task.requirement, task.test_list, candidate, report
            )
            completion = backend.complete(request(rep_prompt.rendered))
            candidate = CandidateProgram(
                source=extract_code(completion.text),
                task_id=task.task_id,
                origin="repaired",
                repair_round=round_no,
            )
            report = sandbox.run(candidate, task.test_list)
            attempts.append(Attempt(candidate, report, rep_prompt.digest))
            if report.verdict == Verdict.PASS:
                return _outcome(
                    task, config, Status.SOLVED_AFTER_REPAIR, round_no, attempts, hits, budget
                )

        return _outcome(task, config, Status.UNSOLVED, None, attempts, hits, budget)
    except (BackendError, ProviderError, SandboxSetupError) as exc:
        return _outcome(
            task, config, Status.INFRASTRUCTURE_FAILURE, None, attempts, [], budget,
            error=f"{type(exc).__name__}: {exc}",
        )


def _outcome(task, config, status, round_no, attempts, hits, budget, error=None) -> TaskOutcome:
    return TaskOutcome(
        task_id=task.task_id,
        scenario=config.scenario,
        status=status,
        repair_round=round_no,
        attempts=tuple(attempts),
        hits_used=tuple(h.entry.task_id for h in hits),
        repair_budget=budget,
        error=error,
    )


@dataclass(frozen=True)
class BenchmarkReport:
    scenario: Scenario
    outcomes: tuple[TaskOutcome, ...]

    @property
    def total(self) -> int:
        return len(self.outcomes)

    @property
    def solved(self) -> int:
        return sum(1 for o in self.outcomes if o.solved)

    @property
    def solve_rate(self) -> float:
        return self.solved / self.total if self.total else 0.0

    @property
    def infrastructure_failures(self) -> int:
        return sum(1 for o in self.outcomes if o.status == Status.INFRASTRUCTURE_FAILURE)

    def status_counts(self) -> dict[str, int]:
        counts = {s.value: 0 for s in Status}
        for o in self.outcomes:
            counts[o.status.value] += 1
        return counts

    def repair_round_counts(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for o in self.outcomes:
            if o.status == Status.SOLVED_AFTER_REPAIR:
                counts[o.repair_round] = counts.get(o.repair_round, 0) + 1
        return counts


def improvement_percent(solved: int, baseline_solved: int) -> float:
    """Relative gain of a scenario's solved count over the generate-only
    baseline: (solved - baseline) / baseline * 100."""
    if baseline_solved == 0:
        raise ValueError("baseline solved count is zero; improvement undefined")
    return (solved - baseline_solved) / baseline_solved * 100.0


def run_benchmark(
    tasks: Corpus,
    config: PipelineConfig,
    backend: CompletionBackend,
    retrieval_corpus: Corpus | None = None,
) -> BenchmarkReport:
    """Solve every task under one scenario; per-task failures are recorded,
    never propagated. Outcomes keep corpus order."""
    for task in tasks:
        if not task.test_list:
            raise ValueError(f"benchmark task {task.task_id} has no tests")
    retrieval_corpus = retrieval_corpus or tasks
    retriever = Retriever(strategy=config.strategy)
    if config.scenario.includes_search:
        retriever.warm(retrieval_corpus)
    sandbox = Sandbox(limits=config.limits)

    def solve(task: CorpusEntry) -> TaskOutcome:
        try:
            return solve_task(task, retrieval_corpus, config, backend, retriever, sandbox)
        except Exception as exc:  # per-task isolation
            return TaskOutcome(
                task_id=task.task_id,
                scenario=config.scenario,
                status=Status.INFRASTRUCTURE_FAILURE,
                repair_round=None,
                attempts=(),
                hits_used=(),
                repair_budget=config.effective_repair_rounds,
                error=f"{type(exc).__name__}: {exc}",
            )

    with ThreadPoolExecutor(max_workers=config.worker_count) as pool:
        outcomes = tuple(pool.map(solve, tasks))
    return BenchmarkReport(scenario=config.scenario, outcomes=outcomes)


def config_for_scenario(config: PipelineConfig, scenario: Scenario) -> PipelineConfig:
    return replace(config, scenario=scenario)
