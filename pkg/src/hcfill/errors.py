"""Exception taxonomy.  CLI exit codes: InputError -> 1, VerificationError -> 2."""

from __future__ import annotations


class InputError(ValueError):
    """Malformed or inconsistent input (bad file, dimension mismatch, ...)."""


class UncoverableError(InputError):
    """The requested ball family cannot cover the target."""


class VerificationError(RuntimeError):
    """An inequality the artifact is supposed to certify failed.

    Carries the full counterexample payload in `report`.
    """

    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report or {}


class DecompositionViolation(VerificationError):
    """A disjoint-ball decomposition failed one of its certified inequalities."""


class PushoutPreconditionError(VerificationError):
    """A face carried too much content for a safe radial projection."""
