"""Scenario registry, configuration handling, and the batch runner.

Configs are JSON documents with a flat schema:

    {
      "scenario": "coin_tomography",
      "seed": 42,
      "n_steps": 1000,
      "interaction": "expectation",
      "summary_interval": 10,
      "agents": [
        {"id": "agent", "postulate": "classical", "n_outcomes": 2,
         "prior": {"kind": "grid_uniform", "lo": 0.0, "hi": 1.0},
         "menu": "flip", "utility": {"kind": "uniform"},
         "regularization": "none", "n_particles": null},
        {"id": "source", "source": true, "point": [0.75]}
      ],
      "out_dir": null
    }

``parse_config`` validates everything up front and reports the complete list
of violations at once.  Registry entries provide full default configs, so
``parse_config(emit_config(default))`` is the identity.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .agents import Action, Agent, UtilityFn
from .errors import ConfigError, ImpossibleOutcomeError, QBAgentsError, ValidationError
from .inference import (
    DEFAULT_BALL_PARTICLES,
    delta_ensemble,
    grid_ensemble,
    sample_uniform,
)
from .core_math import DEFAULT_GRID_POINTS
from .interaction import (
    EXPECTATION,
    MODES,
    REGULARIZATIONS,
    ExogenousSource,
    RunSpec,
    Trace,
    run,
)
from .postulate import (
    Interval,
    QubitBall,
    classical_postulate,
    phi_matrix,
    quantum_postulate,
    sqrt_phi,
)
from .quantum import conditional_matrix, pauli_povm, sic_d2
from .rng import stream


# ---------------------------------------------------------------------------
# Priors

def semicircle_pdf(theta):
    """Semicircular density centered at 1/2 with radius 1/2 (support [0, 1])."""
    t = np.asarray(theta, dtype=float)
    return np.sqrt(np.clip(0.25 - (t - 0.5) ** 2, 0.0, None))


def triangular_pdf(theta, peak: float = 0.7):
    """Triangular density on [0, 1] peaked at ``peak``."""
    t = np.asarray(theta, dtype=float)
    up = np.where(t <= peak, t / peak, 0.0)
    down = np.where(t > peak, (1.0 - t) / (1.0 - peak), 0.0)
    return up + down


PRIOR_KINDS = ("grid_uniform", "grid_pdf", "grid_beta", "uniform_ball",
               "delta", "two_sided_coin", "four_delta_xz")
GRID_PDFS = {"semicircle": semicircle_pdf, "triangular": triangular_pdf}

FOUR_DELTA_POINTS = [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0],
                     [1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]


def _prior_space(prior: dict) -> str:
    kind = prior.get("kind")
    if kind in ("grid_uniform", "grid_pdf", "grid_beta", "two_sided_coin"):
        return "interval"
    if kind in ("uniform_ball", "four_delta_xz"):
        return "ball"
    if kind == "delta":
        pts = np.asarray(prior.get("points", []), dtype=float)
        if pts.ndim == 2 and pts.shape[1] == 3:
            return "ball"
        return "interval"
    return "unknown"


def _build_ensemble(prior: dict, n_particles, init_rng):
    kind = prior["kind"]
    if kind == "grid_uniform":
        region = Interval(prior.get("lo", 0.0), prior.get("hi", 1.0))
        return grid_ensemble(region, n_particles or DEFAULT_GRID_POINTS)
    if kind == "grid_pdf":
        pdf = GRID_PDFS[prior["name"]]
        extra = {k: v for k, v in prior.items() if k not in ("kind", "name")}
        region = Interval(0.0, 1.0)
        return grid_ensemble(region, n_particles or DEFAULT_GRID_POINTS,
                             pdf=lambda t: pdf(t, **extra))
    if kind == "grid_beta":
        from .core_math import BetaParams, beta_pdf
        params = BetaParams(prior["alpha"], prior["beta"])
        region = Interval(0.0, 1.0)
        return grid_ensemble(region, n_particles or DEFAULT_GRID_POINTS,
                             pdf=lambda t: beta_pdf(t, params))
    if kind == "uniform_ball":
        return sample_uniform(QubitBall(), n_particles or DEFAULT_BALL_PARTICLES,
                              init_rng)
    if kind == "delta":
        pts = np.asarray(prior["points"], dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        weights = prior.get("weights") or [1.0 / len(pts)] * len(pts)
        region = QubitBall() if pts.shape[1] == 3 else Interval(0.0, 1.0)
        return delta_ensemble(pts, weights, region)
    if kind == "two_sided_coin":
        return delta_ensemble([[0.0], [1.0]], [0.5, 0.5], Interval(0.0, 1.0))
    if kind == "four_delta_xz":
        return delta_ensemble(FOUR_DELTA_POINTS, [0.25] * 4, QubitBall())
    raise ValidationError(f"unknown prior kind {kind!r}")


# ---------------------------------------------------------------------------
# Menus

def _pauli_actions(axes: str = "XYZ") -> tuple[Action, ...]:
    ref = sic_d2()
    return tuple(Action(ax, conditional_matrix(pauli_povm(ax), ref), ("+1", "-1"))
                 for ax in axes)


def _sharp_pauli_actions() -> tuple[Action, ...]:
    # Sharp two-outcome actions: Pauli conditional matrices pushed through the
    # principal square root of Phi.  Valid for a classical agent only.
    root = sqrt_phi(phi_matrix(sic_d2()))
    return tuple(Action(a.name, a.matrix @ root, a.outcomes)
                 for a in _pauli_actions())


def _menu(name: str) -> tuple[Action, ...]:
    if name == "flip":
        return (Action("flip", np.eye(2), ("heads", "tails")),)
    if name == "z_reference":
        return (Action("Z", np.eye(2), ("+1", "-1")),)
    if name == "paulis":
        return _pauli_actions()
    if name == "paulis_zx":
        return _pauli_actions("ZX")
    if name == "sharp_paulis":
        return _sharp_pauli_actions()
    if name == "sic_reference":
        ref = sic_d2()
        return (Action("sic", conditional_matrix(ref.effects, ref),
                       ("1", "2", "3", "4")),)
    raise ValidationError(f"unknown menu {name!r}")


MENUS_BY_N = {
    2: ("flip", "z_reference"),
    4: ("paulis", "paulis_zx", "sharp_paulis", "sic_reference"),
}


# ---------------------------------------------------------------------------
# Config dataclasses

@dataclass(frozen=True)
class AgentSpec:
    id: str
    postulate: str
    n_outcomes: int
    prior: dict
    menu: str
    utility: dict = field(default_factory=lambda: {"kind": "uniform"})
    regularization: str = "none"
    n_particles: int | None = None

    def to_dict(self) -> dict:
        return {"id": self.id, "postulate": self.postulate,
                "n_outcomes": self.n_outcomes, "prior": self.prior,
                "menu": self.menu, "utility": self.utility,
                "regularization": self.regularization,
                "n_particles": self.n_particles}


@dataclass(frozen=True)
class SourceSpec:
    id: str
    point: tuple[float, ...]

    def to_dict(self) -> dict:
        return {"id": self.id, "source": True, "point": list(self.point)}


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    seed: int
    n_steps: int
    agents: tuple
    interaction: str = EXPECTATION
    summary_interval: int = 10
    out_dir: str | None = None

    def to_dict(self) -> dict:
        return {"scenario": self.scenario, "seed": self.seed,
                "n_steps": self.n_steps, "interaction": self.interaction,
                "summary_interval": self.summary_interval,
                "agents": [a.to_dict() for a in self.agents],
                "out_dir": self.out_dir}


def config_from_dict(data: dict) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError(["config root must be a JSON object"])
    agents = []
    for block in data.get("agents", []):
        if block.get("source"):
            agents.append(SourceSpec(block.get("id", "source"),
                                     tuple(float(x) for x in block.get("point", []))))
        else:
            agents.append(AgentSpec(
                id=block.get("id", "agent"),
                postulate=block.get("postulate", ""),
                n_outcomes=int(block.get("n_outcomes", 0)),
                prior=dict(block.get("prior", {})),
                menu=block.get("menu", ""),
                utility=dict(block.get("utility", {"kind": "uniform"})),
                regularization=block.get("regularization", "none"),
                n_particles=block.get("n_particles"),
            ))
    return ScenarioConfig(
        scenario=data.get("scenario", ""),
        seed=int(data.get("seed", 0)),
        n_steps=int(data.get("n_steps", 0)),
        agents=tuple(agents),
        interaction=data.get("interaction", EXPECTATION),
        summary_interval=int(data.get("summary_interval", 10)),
        out_dir=data.get("out_dir"),
    )


def emit_config(config: ScenarioConfig) -> str:
    return json.dumps(config.to_dict(), indent=2, sort_keys=True)


def parse_config(text: str) -> ScenarioConfig:
    """Parse and fully validate a JSON config; raises ``ConfigError`` carrying
    every violation found."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError([f"invalid JSON: {err}"]) from err
    config = config_from_dict(data)
    violations = validate_config(config)
    if violations:
        raise ConfigError(violations)
    return config


def validate_config(config: ScenarioConfig) -> list[str]:
    """All violations in the config; empty when valid."""
    problems: list[str] = []
    if config.scenario not in REGISTRY:
        problems.append(f"unknown scenario {config.scenario!r}")
    if config.n_steps < 0:
        problems.append("n_steps must be nonnegative")
    if config.summary_interval < 1:
        problems.append("summary_interval must be at least 1")
    if config.interaction not in MODES:
        problems.append(f"unknown interaction mode {config.interaction!r}")
    if len(config.agents) != 2:
        problems.append(f"exactly 2 agent blocks required, got {len(config.agents)}")
        return problems
    spaces = []
    for block in config.agents:
        if isinstance(block, SourceSpec):
            if len(block.point) not in (1, 3):
                problems.append(f"source {block.id!r}: point must have 1 or 3 components")
            spaces.append("interval" if len(block.point) == 1 else "ball")
            continue
        spaces.append(_prior_space(block.prior))
        problems.extend(_validate_agent(block))
    for i, block in enumerate(config.agents):
        if isinstance(block, SourceSpec):
            continue
        reg = block.regularization
        other = spaces[1 - i]
        mine = spaces[i]
        if reg == "z_projection" and (mine != "interval" or other != "ball"):
            problems.append(f"agent {block.id!r}: z_projection needs a scalar agent "
                            "receiving from a Bloch-ball agent")
        if reg == "z_embedding" and (mine != "ball" or other != "interval"):
            problems.append(f"agent {block.id!r}: z_embedding needs a Bloch-ball agent "
                            "receiving from a scalar agent")
        if reg == "none" and mine != other and mine != "unknown" and other != "unknown":
            problems.append(f"agent {block.id!r}: incompatible parameter spaces "
                            "require a regularization")
    return problems


def _validate_agent(block: AgentSpec) -> list[str]:
    problems = []
    pid = f"agent {block.id!r}"
    if block.postulate not in ("classical", "quantum"):
        problems.append(f"{pid}: unknown postulate {block.postulate!r}")
    n = block.n_outcomes
    if n < 2:
        problems.append(f"{pid}: n_outcomes must be at least 2")
    if block.postulate == "quantum":
        root = math.isqrt(max(n, 0))
        if root * root != n:
            problems.append(f"{pid}: N={n} is not the square of an integer")
        elif n != 4:
            problems.append(f"{pid}: only the 4-outcome qubit reference action is built in")
    kind = block.prior.get("kind")
    if kind not in PRIOR_KINDS:
        problems.append(f"{pid}: unknown prior kind {kind!r}")
    else:
        problems.extend(f"{pid}: {msg}" for msg in _validate_prior(block))
    if block.menu not in MENUS_BY_N.get(2, ()) + MENUS_BY_N.get(4, ()):
        problems.append(f"{pid}: unknown menu {block.menu!r}")
    elif n in MENUS_BY_N and block.menu not in MENUS_BY_N[n]:
        problems.append(f"{pid}: menu {block.menu!r} incompatible with N={n}")
    ukind = block.utility.get("kind")
    if ukind not in ("uniform", "table"):
        problems.append(f"{pid}: unknown utility kind {ukind!r}")
    elif ukind == "table":
        values = block.utility.get("values", {})
        if not isinstance(values, dict) or not values:
            problems.append(f"{pid}: utility table must be a nonempty mapping")
        else:
            for name, row in values.items():
                if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in row):
                    problems.append(f"{pid}: non-finite utility for action {name!r}")
    if block.regularization not in REGULARIZATIONS:
        problems.append(f"{pid}: unknown regularization {block.regularization!r}")
    if block.n_particles is not None and block.n_particles < 2:
        problems.append(f"{pid}: n_particles must be at least 2")
    return problems


def _validate_prior(block: AgentSpec) -> list[str]:
    prior = block.prior
    kind = prior["kind"]
    problems = []
    space = _prior_space(prior)
    if kind == "grid_uniform":
        lo, hi = prior.get("lo", 0.0), prior.get("hi", 1.0)
        if not (0.0 <= lo < hi <= 1.0):
            problems.append(f"invalid interval [{lo}, {hi}]")
    if kind == "grid_pdf" and prior.get("name") not in GRID_PDFS:
        problems.append(f"unknown grid pdf {prior.get('name')!r}")
    if kind == "grid_beta" and not (prior.get("alpha", 0) > 0 and prior.get("beta", 0) > 0):
        problems.append("Beta parameters must be positive")
    if kind == "delta":
        pts = np.asarray(prior.get("points", []), dtype=float)
        if pts.size == 0:
            problems.append("delta prior needs at least one point")
        elif space == "ball":
            if np.any(np.linalg.norm(pts.reshape(-1, 3), axis=1) > 1.0 + 1e-9):
                problems.append("delta prior point outside the Bloch ball")
        else:
            flat = pts.reshape(-1)
            if np.any(flat < 0.0) or np.any(flat > 1.0):
                problems.append("delta prior point outside [0, 1]")
    if block.regularization == "support_restriction" and space != "ball":
        problems.append("support_restriction requires a prior supported inside "
                        "the Bloch-ball region")
    if block.postulate == "quantum" and space != "ball":
        problems.append(f"prior kind {kind!r} is not a valid quantum state density")
    if block.postulate == "classical" and block.n_outcomes == 2 and space != "interval":
        problems.append(f"prior kind {kind!r} needs a scalar parameter")
    return problems


# ---------------------------------------------------------------------------
# Registry

@dataclass(frozen=True)
class RegistryEntry:
    description: str
    metrics_kind: str
    default: ScenarioConfig


def _agent(id, postulate, n, prior, menu, utility=None, reg="none", n_particles=None):
    return AgentSpec(id, postulate, n, prior, menu,
                     utility or {"kind": "uniform"}, reg, n_particles)


def _registry() -> dict[str, RegistryEntry]:
    ball = {"kind": "uniform_ball"}
    entries = {
        "coin_tomography": RegistryEntry(
            "One classical agent estimating the bias of coins from a theta=3/4 source",
            "coin_tomography",
            ScenarioConfig("coin_tomography", 42, 1000, (
                _agent("agent", "classical", 2,
                       {"kind": "grid_uniform", "lo": 0.0, "hi": 1.0}, "flip"),
                SourceSpec("source", (0.75,)),
            ))),
        "qubit_tomography": RegistryEntry(
            "One qubit agent taking random Pauli actions on systems from a |+> source",
            "qubit_tomography",
            ScenarioConfig("qubit_tomography", 42, 500, (
                _agent("agent", "quantum", 4, ball, "paulis"),
                SourceSpec("source", (1.0, 0.0, 0.0)),
            ))),
        "classical_pair": RegistryEntry(
            "Two coin-flipping agents, semicircular vs triangular initial priors",
            "pair_1d",
            ScenarioConfig("classical_pair", 42, 1000, (
                _agent("alice", "classical", 2,
                       {"kind": "grid_pdf", "name": "semicircle"}, "flip"),
                _agent("bob", "classical", 2,
                       {"kind": "grid_pdf", "name": "triangular", "peak": 0.7}, "flip"),
            ))),
        "classical_disjoint": RegistryEntry(
            "Two coin-flipping agents with disjoint uniform priors [0,1/3] and [2/3,1]",
            "pair_1d",
            ScenarioConfig("classical_disjoint", 42, 100, (
                _agent("alice", "classical", 2,
                       {"kind": "grid_uniform", "lo": 0.0, "hi": 1.0 / 3.0}, "flip"),
                _agent("bob", "classical", 2,
                       {"kind": "grid_uniform", "lo": 2.0 / 3.0, "hi": 1.0}, "flip"),
            ))),
        "quantum_pair_flat": RegistryEntry(
            "Two qubit agents exchanging systems, random Pauli actions, flat utilities",
            "pair_ball",
            ScenarioConfig("quantum_pair_flat", 42, 100, (
                _agent("alice", "quantum", 4, ball, "paulis"),
                _agent("bob", "quantum", 4, ball, "paulis"),
            ))),
        "quantum_pair_biasedZ": RegistryEntry(
            "Two qubit agents; one values the Pauli Z outcomes at 0.98 and 1.02",
            "pair_ball",
            ScenarioConfig("quantum_pair_biasedZ", 42, 100, (
                _agent("alice", "quantum", 4, ball, "paulis"),
                _agent("bob", "quantum", 4, ball, "paulis",
                       {"kind": "table", "values": {"Z": [0.98, 1.02]}}),
            ))),
        "quinn_clark": RegistryEntry(
            "Qubit agent (reference action) vs a two-outcome classical agent on the z axis",
            "z_marginal",
            ScenarioConfig("quinn_clark", 42, 100, (
                _agent("quinn", "quantum", 4, ball, "sic_reference",
                       reg="z_embedding"),
                _agent("clark", "classical", 2,
                       {"kind": "grid_uniform", "lo": 0.0, "hi": 1.0}, "z_reference",
                       reg="z_projection"),
            ))),
        "quinn_clara_pauli": RegistryEntry(
            "Qubit agent vs a 4-outcome classical agent with the same Pauli actions",
            "pair_ball",
            ScenarioConfig("quinn_clara_pauli", 42, 100, (
                _agent("quinn", "quantum", 4, ball, "paulis"),
                _agent("clara", "classical", 4, ball, "paulis",
                       reg="support_restriction"),
            ))),
        "quinn_clara_sharp": RegistryEntry(
            "Qubit agent vs a 4-outcome classical agent with sharp non-quantum actions",
            "pair_ball",
            ScenarioConfig("quinn_clara_sharp", 42, 100, (
                _agent("quinn", "quantum", 4, ball, "paulis"),
                _agent("clara", "classical", 4, ball, "sharp_paulis",
                       reg="support_restriction"),
            ))),
        "prior_coins_simultaneous": RegistryEntry(
            "Belief polarization: two-sided-coin priors under simultaneous prior sampling",
            "pair_1d",
            ScenarioConfig("prior_coins_simultaneous", 42, 10, (
                _agent("alice", "classical", 2, {"kind": "two_sided_coin"}, "flip"),
                _agent("bob", "classical", 2, {"kind": "two_sided_coin"}, "flip"),
            ), interaction="prior_simultaneous")),
        "prior_coins_turns": RegistryEntry(
            "Two-sided-coin priors under turn-based prior sampling (always agree)",
            "pair_1d",
            ScenarioConfig("prior_coins_turns", 42, 10, (
                _agent("alice", "classical", 2, {"kind": "two_sided_coin"}, "flip"),
                _agent("bob", "classical", 2, {"kind": "two_sided_coin"}, "flip"),
            ), interaction="prior_turns")),
        "prior_qubits_turns": RegistryEntry(
            "Four-delta qubit priors, turn-based prior sampling over Z and X actions",
            "pair_ball",
            ScenarioConfig("prior_qubits_turns", 42, 20, (
                _agent("alice", "quantum", 4, {"kind": "four_delta_xz"}, "paulis_zx"),
                _agent("bob", "quantum", 4, {"kind": "four_delta_xz"}, "paulis_zx"),
            ), interaction="prior_turns")),
    }
    return entries


REGISTRY = _registry()


def default_config(scenario: str, seed: int = 42) -> ScenarioConfig:
    if scenario not in REGISTRY:
        raise ConfigError([f"unknown scenario {scenario!r}"])
    return replace(REGISTRY[scenario].default, seed=seed)


# ---------------------------------------------------------------------------
# Building and running

def build_runtime(config: ScenarioConfig) -> RunSpec:
    violations = validate_config(config)
    if violations:
        raise ConfigError(violations)
    entry = REGISTRY[config.scenario]
    slots = []
    regs = []
    for i, block in enumerate(config.agents):
        if isinstance(block, SourceSpec):
            slots.append(ExogenousSource(block.id, np.asarray(block.point)))
            regs.append("none")
            continue
        post = (quantum_postulate() if block.postulate == "quantum"
                else classical_postulate(block.n_outcomes))
        ensemble = _build_ensemble(block.prior, block.n_particles,
                                   stream(config.seed, "agent", i, "init"))
        utility = UtilityFn()
        if block.utility.get("kind") == "table":
            utility = UtilityFn({name: tuple(float(v) for v in row)
                                 for name, row in block.utility["values"].items()})
        slots.append(Agent(block.id, post, ensemble, _menu(block.menu), utility))
        regs.append(block.regularization)
    return RunSpec(
        scenario=config.scenario,
        seed=config.seed,
        n_steps=config.n_steps,
        slots=tuple(slots),
        incoming_reg=tuple(regs),
        mode=config.interaction,
        summary_interval=config.summary_interval,
        metrics_kind=entry.metrics_kind,
        config=config.to_dict(),
    )


def run_config(config: ScenarioConfig) -> Trace:
    return run(build_runtime(config))


# ---------------------------------------------------------------------------
# Batch runner

@dataclass
class BatchResult:
    scenario: str
    master_seed: int
    n_seeds: int
    rows: list
    aggregates: dict

    def to_dict(self) -> dict:
        return {"scenario": self.scenario, "master_seed": self.master_seed,
                "n_seeds": self.n_seeds, "rows": self.rows,
                "aggregates": self.aggregates}


def batch(config: ScenarioConfig, n_seeds: int, *, early_step: int = 10) -> BatchResult:
    """Run ``n_seeds`` replicas with seeds master, master+1, ... and aggregate.

    Per-seed failures (belief polarization) are recorded, not fatal.  Each row
    carries the final metrics and the metrics at ``early_step`` for trend
    comparisons; aggregates hold the median and quartiles of every numeric
    final metric across the successful seeds.
    """
    if n_seeds < 1:
        raise ValidationError("n_seeds must be at least 1")
    rows = []
    for i in range(n_seeds):
        seed = config.seed + i
        try:
            trace = run_config(replace(config, seed=seed))
        except ImpossibleOutcomeError as err:
            rows.append({"seed": seed, "error": "impossible_outcome",
                         "step": err.step, "agent": err.agent_id})
            continue
        except QBAgentsError as err:
            rows.append({"seed": seed, "error": type(err).__name__,
                         "message": str(err)})
            continue
        early = {}
        for rec in trace.records:
            if rec.step == min(early_step, config.n_steps):
                early = dict(rec.metrics)
                break
        rows.append({
            "seed": seed,
            "final_metrics": dict(trace.final["last_metrics"]),
            "early_metrics": early,
            "final_summaries": {
                aid: {"mean": s["mean"], "semi_major": s["semi_major"]}
                for aid, s in trace.final["summaries"].items()},
        })
    ok = [r for r in rows if "error" not in r]
    keys = sorted({k for r in ok for k in r["final_metrics"]})
    aggregates = {"n_errors": len(rows) - len(ok)}
    for key in keys:
        values = np.array([r["final_metrics"][key] for r in ok
                           if key in r["final_metrics"]])
        if values.size:
            aggregates[key] = {
                "median": float(np.median(values)),
                "q25": float(np.quantile(values, 0.25)),
                "q75": float(np.quantile(values, 0.75)),
            }
    return BatchResult(config.scenario, config.seed, n_seeds, rows, aggregates)
