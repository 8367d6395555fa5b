"""The interaction engine: exogenous sources, expectation and prior sampling
between agent pairs, regularizations across species, and the run driver.

In one expectation-sampling step both parties broadcast the mean of their
current beliefs (the first-subsystem marginal of an exchangeable prior), both
choose an action by expected utility, and each receives an outcome drawn from
their own postulate evaluated at the *other's* broadcast.  Updates then happen
simultaneously: broadcasts are the pre-update means on both sides, so the step
has no ordering artifact.  An exogenous source is the degenerate case of a
party whose belief is a delta function and who never updates, which is why a
pair run against a delta source reproduces the single-agent run exactly under
shared seeds.

Prior sampling replaces the broadcast mean with a weighted draw from the
broadcaster's ensemble.  It may be run simultaneously or turn based; with
delta-mixture priors it can polarize beliefs to the point where a further
outcome is impossible, which surfaces as ``ImpossibleOutcomeError``.

Cross-species regularizations (a qubit party facing a two-outcome party):

* ``z_projection``: a Bloch broadcast (a, b, c) becomes theta = (1 + c) / 2,
  the Born probability of the +1 outcome of a Pauli Z measurement;
* ``z_embedding``: a scalar broadcast theta becomes the Bloch point
  (0, 0, 2 theta - 1), a state on the z axis;
* ``support_restriction``: identity at interaction time; the constraint lives
  in the prior, whose support must already sit inside the quantum region.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .agents import Action, Agent, broadcast_point, choose_action
from .errors import ImpossibleOutcomeError, ValidationError
from .inference import bayes_update, maybe_resample, posterior_summary
from .postulate import (
    PhysicalPostulate,
    apply_postulate,
    ref_probs_of_points,
)
from .quantum import bloch_to_density, frequency_operator, trace_distance
from .rng import agent_streams

REGULARIZATIONS = ("none", "z_projection", "z_embedding", "support_restriction")

EXPECTATION = "expectation"
PRIOR_SIMULTANEOUS = "prior_simultaneous"
PRIOR_TURNS = "prior_turns"
MODES = (EXPECTATION, PRIOR_SIMULTANEOUS, PRIOR_TURNS)


@dataclass(frozen=True)
class ExogenousSource:
    """An infinitely confident party: broadcasts a fixed point, never updates."""

    id: str
    point: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float).ravel())


def regularize(kind: str, point: np.ndarray) -> np.ndarray:
    """Map an incoming broadcast into the receiver's parameter space."""
    if kind in ("none", "support_restriction"):
        return point
    if kind == "z_projection":
        p = np.asarray(point, dtype=float).ravel()
        if p.size != 3:
            raise ValidationError("z_projection expects a Bloch point")
        return np.array([(1.0 + p[2]) / 2.0])
    if kind == "z_embedding":
        p = np.asarray(point, dtype=float).ravel()
        if p.size != 1:
            raise ValidationError("z_embedding expects a scalar parameter")
        return np.array([0.0, 0.0, 2.0 * p[0] - 1.0])
    raise ValidationError(f"unknown regularization {kind!r}")


def sample_outcome(post: PhysicalPostulate, broadcast: np.ndarray, R,
                   regularization: str, rng: np.random.Generator) -> int:
    """Draw an outcome with the probabilities the receiver's postulate assigns
    at the (regularized) broadcast point."""
    point = regularize(regularization, broadcast)
    probs = ref_probs_of_points(post, point)[0]
    q = apply_postulate(post, probs, R)
    return int(rng.choice(q.size, p=q))


@dataclass(frozen=True)
class AgentStepRecord:
    agent_id: str
    action: str
    outcome: int
    outcome_label: str
    mean: tuple[float, ...]
    std: tuple[float, ...]
    semi_major: float
    cov_trace: float
    ess: float


@dataclass(frozen=True)
class InteractionRecord:
    step: int
    agents: tuple[AgentStepRecord | None, ...]
    metrics: dict


@dataclass
class Trace:
    """Everything a run produced: per-step records plus final summaries and
    the raw material for plots (grid snapshots, final point clouds)."""

    scenario: str
    seed: int
    config: dict
    mode: str
    records: list = field(default_factory=list)
    initial: dict = field(default_factory=dict)
    final: dict = field(default_factory=dict)
    curves: dict = field(default_factory=dict)
    clouds: dict = field(default_factory=dict)


@dataclass
class RunSpec:
    """A fully built scenario, ready to execute."""

    scenario: str
    seed: int
    n_steps: int
    slots: tuple
    incoming_reg: tuple[str, str]
    mode: str = EXPECTATION
    summary_interval: int = 10
    metrics_kind: str = "none"
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValidationError(f"unknown interaction mode {self.mode!r}")
        if len(self.slots) != 2:
            raise ValidationError("exactly two interaction slots are supported")
        for reg in self.incoming_reg:
            if reg not in REGULARIZATIONS:
                raise ValidationError(f"unknown regularization {reg!r}")
        if self.n_steps < 0:
            raise ValidationError("n_steps must be nonnegative")


def _is_agent(slot) -> bool:
    return isinstance(slot, Agent)


def _summary_dict(agent: Agent) -> dict:
    s = posterior_summary(agent.ensemble)
    return {
        "mean": [float(x) for x in s.mean],
        "std": [float(x) for x in s.std],
        "semi_major": s.semi_major,
        "covariance": [[float(x) for x in row] for row in s.covariance],
        "axis_lengths": [float(x) for x in s.axis_lengths],
        "ess": agent.ensemble.ess(),
    }


def _self_broadcast(slot, mode: str, rng) -> np.ndarray:
    if not _is_agent(slot):
        return slot.point
    if mode == EXPECTATION:
        return broadcast_point(slot)
    ens = slot.ensemble
    idx = rng.choice(ens.n, p=ens.weights)
    return ens.points[idx]


def _receive_and_update(agent: Agent, incoming: np.ndarray, reg: str,
                        streams, step: int) -> tuple[Action, int]:
    action = choose_action(agent, streams["choice"])
    outcome = sample_outcome(agent.postulate, incoming, action.matrix, reg,
                             streams["outcome"])
    try:
        ens = bayes_update(agent.ensemble, agent.postulate, action.matrix, outcome)
    except ImpossibleOutcomeError as err:
        err.step = step
        err.agent_id = agent.id
        raise
    agent.ensemble = maybe_resample(ens, streams["resample"])
    return action, outcome


def run(spec: RunSpec) -> Trace:
    """Execute a two-slot scenario and return its trace.

    Deterministic: identical (config, seed) produce identical traces, including
    every sampled outcome.
    """
    slots = spec.slots
    streams = [agent_streams(spec.seed, i) for i in range(2)]
    trace = Trace(spec.scenario, spec.seed, dict(spec.config), spec.mode)
    counts = [{} for _ in slots]

    snapshot_steps = _snapshot_steps(spec.n_steps)
    for i, slot in enumerate(slots):
        if _is_agent(slot):
            trace.initial[slot.id] = _summary_dict(slot)
            if slot.ensemble.grid:
                trace.curves[slot.id] = [(0, slot.ensemble.points[:, 0].copy(),
                                          slot.ensemble.weights.copy())]

    for step in range(1, spec.n_steps + 1):
        if spec.mode == PRIOR_TURNS:
            step_agents = _turn_based_step(spec, slots, streams, counts, step)
        else:
            step_agents = _simultaneous_step(spec, slots, streams, counts, step)
        summaries = [posterior_summary(s.ensemble) if _is_agent(s) else None
                     for s in slots]
        rec_agents = []
        for i, slot in enumerate(slots):
            if not _is_agent(slot):
                rec_agents.append(None)
                continue
            action, outcome = step_agents[i]
            s = summaries[i]
            rec_agents.append(AgentStepRecord(
                agent_id=slot.id,
                action=action.name,
                outcome=outcome,
                outcome_label=action.outcomes[outcome],
                mean=tuple(float(x) for x in s.mean),
                std=tuple(float(x) for x in s.std),
                semi_major=s.semi_major,
                cov_trace=float(np.trace(s.covariance)),
                ess=slot.ensemble.ess(),
            ))
        metrics = _metrics(spec.metrics_kind, slots, summaries, counts, step)
        trace.records.append(InteractionRecord(step, tuple(rec_agents), metrics))
        if step in snapshot_steps:
            for slot in slots:
                if _is_agent(slot) and slot.ensemble.grid:
                    trace.curves[slot.id].append(
                        (step, slot.ensemble.points[:, 0].copy(),
                         slot.ensemble.weights.copy()))

    for slot in slots:
        if _is_agent(slot) and not slot.ensemble.grid:
            trace.clouds[slot.id] = (slot.ensemble.points.copy(),
                                     slot.ensemble.weights.copy())
    trace.final = {
        "summaries": {s.id: _summary_dict(s) for s in slots if _is_agent(s)},
        "outcome_counts": [
            {f"{name}:{j}": c for (name, j), c in sorted(counts[i].items())}
            for i in range(2)],
        "last_metrics": trace.records[-1].metrics if trace.records else {},
    }
    return trace


def _simultaneous_step(spec, slots, streams, counts, step):
    broadcasts = [_self_broadcast(slot, spec.mode, streams[i]["broadcast"])
                  for i, slot in enumerate(slots)]
    results = [None, None]
    for i, slot in enumerate(slots):
        if not _is_agent(slot):
            continue
        action, outcome = _receive_and_update(
            slot, broadcasts[1 - i], spec.incoming_reg[i], streams[i], step)
        counts[i][(action.name, outcome)] = counts[i].get((action.name, outcome), 0) + 1
        results[i] = (action, outcome)
    return results


def _turn_based_step(spec, slots, streams, counts, step):
    # One round: slot 0 broadcasts to slot 1, which updates; then slot 1
    # broadcasts its refreshed beliefs back to slot 0.
    results = [None, None]
    for sender, receiver in ((0, 1), (1, 0)):
        if not _is_agent(slots[receiver]):
            continue
        point = _self_broadcast(slots[sender], spec.mode, streams[sender]["broadcast"])
        action, outcome = _receive_and_update(
            slots[receiver], point, spec.incoming_reg[receiver],
            streams[receiver], step)
        key = (action.name, outcome)
        counts[receiver][key] = counts[receiver].get(key, 0) + 1
        results[receiver] = (action, outcome)
    return results


def _snapshot_steps(n_steps: int) -> set[int]:
    if n_steps <= 0:
        return set()
    quarters = {round(n_steps * k / 4) for k in range(1, 5)}
    return {s for s in quarters if s >= 1}


def _source_point(slot, summary) -> np.ndarray:
    if _is_agent(slot):
        return np.asarray(summary.mean, dtype=float)
    return slot.point


def _mean_state(summary) -> np.ndarray:
    bloch = np.asarray(summary.mean, dtype=float)
    norm = np.linalg.norm(bloch)
    if norm > 1.0:
        bloch = bloch / norm
    return bloch_to_density(bloch)


def _axis_counts(counts: dict) -> dict:
    out = {}
    for axis in "xyz":
        name = axis.upper()
        out[axis] = (counts.get((name, 0), 0), counts.get((name, 1), 0))
    return out


def _metrics(kind: str, slots, summaries, counts, step: int) -> dict:
    out = _metrics_raw(kind, slots, summaries, counts, step)
    return {k: float(v) for k, v in out.items()}


def _metrics_raw(kind: str, slots, summaries, counts, step: int) -> dict:
    if kind == "none":
        return {}
    if kind == "coin_tomography":
        # Slot 0 is the learner; slot 1 is the source side (an exogenous
        # source or the delta-prior agent standing in for one).
        mean = summaries[0].mean[0]
        heads = sum(c for (name, j), c in counts[0].items() if j == 0)
        freq = heads / step
        return {
            "dist_to_frequency": abs(mean - freq),
            "dist_to_source": abs(mean - _source_point(slots[1], summaries[1])[0]),
            "running_frequency": freq,
        }
    if kind == "qubit_tomography":
        state = _mean_state(summaries[0])
        source_state = bloch_to_density(_source_point(slots[1], summaries[1]))
        freq_op, _missing = frequency_operator(_axis_counts(counts[0]))
        return {
            "dist_to_frequency": trace_distance(state, freq_op),
            "dist_to_source": trace_distance(state, source_state),
        }
    if kind == "pair_1d":
        return {"mean_gap": abs(summaries[0].mean[0] - summaries[1].mean[0])}
    if kind == "pair_ball":
        return {"mean_trace_distance": trace_distance(_mean_state(summaries[0]),
                                                      _mean_state(summaries[1]))}
    if kind == "z_marginal":
        ball = 0 if summaries[0].mean.size == 3 else 1
        chord = 1 - ball
        c_ball = summaries[ball].mean[2]
        theta = summaries[chord].mean[0]
        embedded = bloch_to_density(np.array([0.0, 0.0, 2.0 * theta - 1.0]))
        marginal = bloch_to_density(np.array([0.0, 0.0, np.clip(c_ball, -1.0, 1.0)]))
        return {"z_gap": trace_distance(embedded, marginal)}
    raise ValidationError(f"unknown metrics kind {kind!r}")
