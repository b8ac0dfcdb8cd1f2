"""Exception types shared across the toolkit."""

from __future__ import annotations


class FaasPlanError(Exception):
    """Base class for every error raised by this package."""


class DomainError(FaasPlanError, ValueError):
    """An argument or field value lies outside its valid domain."""


class IncompatibleFormatError(FaasPlanError):
    """A model's serialization format cannot be executed by the chosen runtime."""


class CatalogError(FaasPlanError):
    """A model catalog file is malformed or breaks catalog invariants."""


class NoFeasibleModelError(FaasPlanError):
    """No catalog entry satisfies the selection constraints.

    ``rejections`` maps each candidate name to the first constraint it
    violated, so callers can report why the catalog came up empty.
    """

    def __init__(self, message: str, rejections: dict[str, str]):
        super().__init__(message)
        self.rejections = dict(rejections)


class ScenarioError(FaasPlanError):
    """A scenario, profile or fixture file cannot be loaded or resolved."""


class PreflightError(FaasPlanError):
    """A bench target violates the selected provider's request limits."""

    def __init__(self, message: str, report):
        super().__init__(message)
        self.report = report
