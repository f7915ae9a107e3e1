"""Exception taxonomy shared across the pipeline.

Domain failures (a candidate that does not pass its tests) are *not*
exceptions; they are verdicts. Exceptions here mark broken inputs or
broken infrastructure, which the pipeline reports separately so they
never deflate solve rates.
"""


class CodeloopError(Exception):
    """Base class for all package errors."""


# -- corpus ----------------------------------------------------------------

class CorpusError(CodeloopError):
    pass


class CorpusIOError(CorpusError):
    pass


class CorpusParseError(CorpusError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class DuplicateTaskIdError(CorpusError):
    def __init__(self, task_id: str, line: int):
        super().__init__(f"duplicate task_id {task_id!r} on line {line}")
        self.task_id = task_id
        self.line = line


class UnknownTaskIdError(CorpusError):
    def __init__(self, task_id: str):
        super().__init__(f"unknown task_id {task_id!r}")
        self.task_id = task_id


# -- retrieval / embeddings ------------------------------------------------

class ProviderError(CodeloopError):
    """Remote embedding provider failed; the cause is chained."""


class DimensionMismatchError(CodeloopError):
    def __init__(self, expected: int, got: int):
        super().__init__(f"expected embedding dim {expected}, got {got}")
        self.expected = expected
        self.got = got


# -- completion backends ---------------------------------------------------

class BackendError(CodeloopError):
    """Base class for completion-backend failures (infrastructure)."""


class BackendUnavailableError(BackendError):
    pass


class RateLimitedError(BackendError):
    pass


class NoScriptMatchError(BackendError):
    pass


# -- sandbox ---------------------------------------------------------------

class SandboxSetupError(CodeloopError):
    """The sandbox itself could not run; distinct from any verdict."""


class InvalidInputError(CodeloopError):
    """A stated precondition was violated by the caller."""
