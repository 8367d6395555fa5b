"""Exception hierarchy shared across the package."""

from __future__ import annotations


class QBAgentsError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(QBAgentsError, ValueError):
    """An input violates a documented invariant (normalization, domain, shape)."""


class DimensionMismatchError(ValidationError):
    """Operands have incompatible dimensions."""


class RegionError(QBAgentsError, ValueError):
    """A parameter point lies outside the relevant physically valid region."""


class ImpossibleOutcomeError(QBAgentsError):
    """An observed outcome has probability zero under every point of the support.

    Signals a genuine contradiction between an agent's beliefs and the data
    served to them; reachable by design under prior sampling with delta priors.
    """

    def __init__(self, message: str, *, step: int | None = None,
                 agent_id: str | None = None):
        super().__init__(message)
        self.step = step
        self.agent_id = agent_id


class ConfigError(QBAgentsError):
    """A scenario configuration failed validation.

    Carries the full list of violations so callers can report all problems at
    once instead of one per attempt.
    """

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = list(violations)
