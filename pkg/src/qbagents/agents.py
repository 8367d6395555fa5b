"""Rational agents: action menus, utilities, predictive distributions, and
expected-utility choice.

An agent owns a physical postulate, a belief ensemble over the matching
parameter region, a menu of actions (conditional probability matrices), and a
utility function over (action, outcome) pairs.  Choice maximizes expected
utility; ties within ``TIE_TOL`` are broken uniformly at random, which is what
turns a flat utility function into uniformly random action choice.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core_math import as_cond_prob_matrix, as_prob_vector
from .errors import ValidationError
from .inference import ParticleEnsemble
from .postulate import PhysicalPostulate, ensemble_compatible, likelihood_matrix

TIE_TOL = 1e-12


@dataclass(frozen=True)
class Action:
    """A named action with its conditional probability matrix and outcome labels."""

    name: str
    matrix: np.ndarray
    outcomes: tuple[str, ...]

    def __post_init__(self):
        m = as_cond_prob_matrix(self.matrix)
        if len(self.outcomes) != m.shape[0]:
            raise ValidationError(
                f"action {self.name!r}: {len(self.outcomes)} labels for {m.shape[0]} outcomes")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "outcomes", tuple(self.outcomes))

    @property
    def n_outcomes(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class UtilityFn:
    """Utility of each (action, outcome) pair; unspecified entries default to 1."""

    table: dict = field(default_factory=dict)
    default: float = 1.0

    def row(self, action: Action) -> np.ndarray:
        values = self.table.get(action.name)
        if values is None:
            return np.full(action.n_outcomes, self.default)
        out = np.asarray(values, dtype=float)
        if out.shape != (action.n_outcomes,):
            raise ValidationError(
                f"utility row for {action.name!r} has length {out.size}, "
                f"expected {action.n_outcomes}")
        if not np.all(np.isfinite(out)):
            raise ValidationError(f"utility row for {action.name!r} is not finite")
        return out

    @classmethod
    def uniform(cls) -> "UtilityFn":
        return cls()


@dataclass
class Agent:
    """Postulate + belief ensemble + action menu + utility function.

    Value-semantic record; the interaction loop replaces ``ensemble`` after
    each update.
    """

    id: str
    postulate: PhysicalPostulate
    ensemble: ParticleEnsemble
    menu: tuple[Action, ...]
    utility: UtilityFn = field(default_factory=UtilityFn.uniform)

    def __post_init__(self):
        self.menu = tuple(self.menu)
        if not self.menu:
            raise ValidationError(f"agent {self.id!r}: empty action menu")
        for action in self.menu:
            if action.matrix.shape[1] != self.postulate.n_outcomes:
                raise ValidationError(
                    f"agent {self.id!r}: action {action.name!r} has reference "
                    f"dimension {action.matrix.shape[1]}, postulate expects "
                    f"{self.postulate.n_outcomes}")
            self.utility.row(action)
        if not ensemble_compatible(self.postulate, self.ensemble.region):
            raise ValidationError(
                f"agent {self.id!r}: ensemble region incompatible with postulate")

    def action(self, name: str) -> Action:
        for a in self.menu:
            if a.name == name:
                return a
        raise ValidationError(f"agent {self.id!r}: no action named {name!r}")


def predictive(agent: Agent, action: Action) -> np.ndarray:
    """Posterior predictive q(j) = sum_i w_i p(j | theta_i) for a menu action."""
    like = likelihood_matrix(agent.postulate, action.matrix, agent.ensemble.points)
    return as_prob_vector(agent.ensemble.weights @ like, name="predictive")


def expected_utility(agent: Agent, action: Action) -> float:
    return float(agent.utility.row(action) @ predictive(agent, action))


def choose_action(agent: Agent, rng: np.random.Generator) -> Action:
    """An expected-utility maximizer; ties broken uniformly at random."""
    utilities = np.array([expected_utility(agent, a) for a in agent.menu])
    best = utilities.max()
    tied = np.flatnonzero(utilities >= best - TIE_TOL)
    if tied.size == 1:
        return agent.menu[tied[0]]
    return agent.menu[tied[rng.integers(tied.size)]]


def broadcast_point(agent: Agent) -> np.ndarray:
    """The signal an agent emits: the mean of their current belief density."""
    return agent.ensemble.weights @ agent.ensemble.points
