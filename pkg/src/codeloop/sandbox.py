"""Isolated execution of candidate programs against their tests.

A candidate is syntax-checked first (the interpreter's compile step),
then run with its test assertions appended, MBPP-style, in a single
fresh subprocess: scrubbed environment, temporary working directory,
wall-clock timeout, process group kill. Isolation is process-level
only; the launcher is pluggable so a jailed launcher can be substituted.
"""

from __future__ import annotations

import enum
import os
import shutil
import signal
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InvalidInputError, SandboxSetupError

TEST_MARKER = "__CODELOOP_TEST__:"
MESSAGE_CAP = 2000


class Verdict(enum.Enum):
    PASS = "pass"
    COMPILE_ERROR = "compile-error"
    RUNTIME_ERROR = "runtime-error"
    ASSERTION_FAILURE = "assertion-failure"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class CandidateProgram:
    source: str
    task_id: str
    origin: str = "generated"  # "generated" or "repaired"
    repair_round: int | None = None

    def __post_init__(self):
        if self.origin == "repaired" and (self.repair_round is None or self.repair_round < 1):
            raise ValueError("repaired candidates need a round >= 1")

    def label(self) -> str:
        if self.origin == "repaired":
            return f"repaired(round {self.repair_round})"
        return "generated"


@dataclass(frozen=True)
class TestReport:
    __test__ = False  # not a pytest class

    verdict: Verdict
    failing_test_index: int | None
    message: str
    duration: float

    def __post_init__(self):
        if self.verdict == Verdict.PASS:
            assert self.failing_test_index is None and self.message == ""
        if self.verdict in (Verdict.RUNTIME_ERROR, Verdict.ASSERTION_FAILURE):
            assert self.failing_test_index is not None


@dataclass(frozen=True)
class ResourceLimits:
    wall_clock_secs: float = 10.0
    interpreter: str = sys.executable
    temp_root: str | None = None


def assemble(candidate: CandidateProgram, tests: list[str] | tuple[str, ...]) -> str:
    """Candidate source followed by the assertions, each preceded by an
    index marker on stderr so the first failing test is identifiable."""
    if not tests:
        raise InvalidInputError("tests must be non-empty")
    parts = [candidate.source.rstrip("\n"), "", "import sys as _codeloop_sys"]
    for i, test in enumerate(tests):
        parts.append(
            f'_codeloop_sys.stderr.write("{TEST_MARKER}{i}\\n"); _codeloop_sys.stderr.flush()'
        )
        parts.append(test.rstrip("\n"))
    return "\n".join(parts) + "\n"


def _tail(text: str, cap: int = MESSAGE_CAP) -> str:
    return text if len(text) <= cap else text[-cap:]


def _scrubbed_env(workdir: str) -> dict[str, str]:
    return {
        "PATH": os.environ.get("PATH", "/usr/bin:/bin"),
        "HOME": workdir,
        "TMPDIR": workdir,
        "LC_ALL": "C.UTF-8",
        "PYTHONIOENCODING": "utf-8",
        "PYTHONDONTWRITEBYTECODE": "1",
    }


def _last_marker_index(stderr: str) -> int | None:
    idx = None
    for line in stderr.splitlines():
        if line.startswith(TEST_MARKER):
            suffix = line[len(TEST_MARKER):]
            if suffix.isdigit():
                idx = int(suffix)
    return idx


@dataclass
class SubprocessLauncher:
    """Default launcher: plain subprocess in its own process group."""

    def launch(
        self, argv: list[str], cwd: str, env: dict[str, str], timeout: float
    ) -> tuple[int | None, str, str]:
        """Returns (returncode, stdout, stderr); returncode None on timeout.

        The whole process group is killed on timeout so no orphans survive.
        """
        proc = subprocess.Popen(
            argv,
            cwd=cwd,
            env=env,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
            start_new_session=True,
        )
        try:
            out, err = proc.communicate(timeout=timeout)
            return proc.returncode, out, err
        except subprocess.TimeoutExpired:
            try:
                os.killpg(proc.pid, signal.SIGKILL)
            except ProcessLookupError:
                pass
            out, err = proc.communicate()
            return None, out, err


@dataclass
class Sandbox:
    limits: ResourceLimits = field(default_factory=ResourceLimits)
    launcher: SubprocessLauncher = field(default_factory=SubprocessLauncher)

    def run(self, candidate: CandidateProgram, tests: list[str] | tuple[str, ...]) -> TestReport:
        if not tests:
            raise InvalidInputError("tests must be non-empty")
        interpreter = self.limits.interpreter
        if shutil.which(interpreter) is None and not Path(interpreter).exists():
            raise SandboxSetupError(f"interpreter not found: {interpreter}")
        try:
            workdir = tempfile.mkdtemp(prefix="codeloop-run-", dir=self.limits.temp_root)
        except OSError as exc:
            raise SandboxSetupError(f"cannot create sandbox dir: {exc}") from exc
        start = time.monotonic()
        try:
            return self._run_in(workdir, interpreter, candidate, tests, start)
        finally:
            shutil.rmtree(workdir, ignore_errors=True)

    def _run_in(self, workdir, interpreter, candidate, tests, start) -> TestReport:
        env = _scrubbed_env(workdir)

        # syntax check first: the paper-style "compile" step
        cand_path = Path(workdir) / "candidate.py"
        cand_path.write_text(candidate.source, encoding="utf-8")
        rc, _, err = self.launcher.launch(
            [interpreter, "-m", "py_compile", str(cand_path)],
            cwd=workdir,
            env=env,
            timeout=max(self.limits.wall_clock_secs, 10.0),
        )
        if rc is None:
            raise SandboxSetupError("syntax check timed out")
        if rc != 0:
            return TestReport(
                verdict=Verdict.COMPILE_ERROR,
                failing_test_index=None,
                message=_tail(err.replace(workdir, "<sandbox>").strip()),
                duration=time.monotonic() - start,
            )

        main_path = Path(workdir) / "main.py"
        main_path.write_text(assemble(candidate, tests), encoding="utf-8")
        rc, _, err = self.launcher.launch(
            [interpreter, "-I", str(main_path)],
            cwd=workdir,
            env=env,
            timeout=self.limits.wall_clock_secs,
        )
        duration = time.monotonic() - start
        marker_idx = _last_marker_index(err)
        # scrub the per-run temp path so messages (and therefore repair
        # prompts and reports) are identical across runs
        err = err.replace(workdir, "<sandbox>")
        cleaned = "\n".join(
            line for line in err.splitlines() if not line.startswith(TEST_MARKER)
        ).strip()

        if rc is None:
            return TestReport(
                verdict=Verdict.TIMEOUT,
                failing_test_index=marker_idx,
                message=_tail(
                    f"wall-clock limit of {self.limits.wall_clock_secs}s exceeded"
                    + (f"\n{cleaned}" if cleaned else "")
                ),
                duration=duration,
            )
        if rc == 0:
            return TestReport(
                verdict=Verdict.PASS, failing_test_index=None, message="", duration=duration
            )
        # failure before the first marker is attributed to test 0
        index = marker_idx if marker_idx is not None else 0
        verdict = (
            Verdict.ASSERTION_FAILURE if "AssertionError" in cleaned else Verdict.RUNTIME_ERROR
        )
        return TestReport(
            verdict=verdict,
            failing_test_index=index,
            message=_tail(cleaned),
            duration=duration,
        )


def run(
    candidate: CandidateProgram,
    tests: list[str] | tuple[str, ...],
    limits: ResourceLimits | None = None,
) -> TestReport:
    return Sandbox(limits=limits or ResourceLimits()).run(candidate, tests)
