from __future__ import annotations


class ConsistencyError(RuntimeError):
    """Input violates a structural precondition another stage relied on."""


class ConfigError(ValueError):
    """Invalid option values or combinations."""


class InputError(ValueError):
    """An input file or directory is missing or malformed."""


class StageFailure(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage} failed: {cause}")
        self.stage = stage
        self.cause = cause
