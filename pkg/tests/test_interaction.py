import numpy as np
import pytest
from dataclasses import replace

from qbagents.agents import Action, Agent, broadcast_point
from qbagents.errors import ImpossibleOutcomeError, RegionError, ValidationError
from qbagents.core_math import BetaParams, beta_pdf
from qbagents.inference import delta_ensemble, grid_ensemble, sample_uniform
from qbagents.interaction import (
    EXPECTATION,
    PRIOR_SIMULTANEOUS,
    PRIOR_TURNS,
    ExogenousSource,
    RunSpec,
    regularize,
    run,
    sample_outcome,
)
from qbagents.postulate import Interval, QubitBall, classical_postulate, quantum_postulate
from qbagents.quantum import conditional_matrix, pauli_povm, sic_d2
from qbagents.scenarios import build_runtime, default_config, run_config

QUANTUM = quantum_postulate()
CLASSICAL2 = classical_postulate(2)


def flip_menu():
    return (Action("flip", np.eye(2), ("heads", "tails")),)


def coin_agent(name, pdf=None, n=2001):
    ens = grid_ensemble(Interval(), n, pdf=pdf)
    return Agent(name, CLASSICAL2, ens, flip_menu())


def pair_spec(slots, mode=EXPECTATION, n_steps=5, seed=0, metrics="pair_1d",
              regs=("none", "none")):
    return RunSpec(scenario="test", seed=seed, n_steps=n_steps, slots=tuple(slots),
                   incoming_reg=tuple(regs), mode=mode, metrics_kind=metrics)


class TestBroadcast:
    def test_delta(self):
        agent = Agent("a", CLASSICAL2,
                      delta_ensemble([[0.75]], [1.0], Interval()), flip_menu())
        assert broadcast_point(agent)[0] == 0.75

    def test_beta_grid(self):
        params = BetaParams(772, 230)
        agent = coin_agent("a", pdf=lambda t: beta_pdf(t, params), n=10_001)
        assert broadcast_point(agent)[0] == pytest.approx(0.770459, abs=2e-4)

    def test_uniform_ball(self):
        ens = sample_uniform(QubitBall(), 50_000, np.random.default_rng(0))
        agent = Agent("q", QUANTUM, ens,
                      (Action("X", conditional_matrix(pauli_povm("X"), sic_d2()),
                              ("+1", "-1")),))
        assert np.linalg.norm(broadcast_point(agent)) < 0.03


class TestRegularize:
    def test_z_projection(self):
        out = regularize("z_projection", np.array([0.3, -0.1, 0.5]))
        assert out.shape == (1,)
        assert out[0] == pytest.approx(0.75)

    def test_z_embedding(self):
        out = regularize("z_embedding", np.array([1.0]))
        assert np.allclose(out, [0.0, 0.0, 1.0])

    def test_identity_kinds(self):
        p = np.array([0.2])
        assert regularize("none", p) is p
        assert regularize("support_restriction", p) is p

    def test_bad_kind(self):
        with pytest.raises(ValidationError):
            regularize("project_everything", np.array([0.1]))

    def test_wrong_shapes(self):
        with pytest.raises(ValidationError):
            regularize("z_projection", np.array([0.1]))
        with pytest.raises(ValidationError):
            regularize("z_embedding", np.array([0.1, 0.2, 0.3]))


class TestSampleOutcome:
    def test_classical_flip_frequency(self):
        rng = np.random.default_rng(1)
        n = 10_000
        heads = sum(sample_outcome(CLASSICAL2, np.array([0.75]), np.eye(2),
                                   "none", rng) == 0 for _ in range(n))
        sigma = np.sqrt(n * 0.75 * 0.25)
        assert abs(heads - 0.75 * n) < 3 * sigma

    def test_projection_of_plus_state_is_balanced(self):
        # a Bloch broadcast at |+> projects to theta = 1/2 on the z axis
        rng = np.random.default_rng(2)
        n = 10_000
        heads = sum(sample_outcome(CLASSICAL2, np.array([1.0, 0.0, 0.0]), np.eye(2),
                                   "z_projection", rng) == 0 for _ in range(n))
        sigma = np.sqrt(n * 0.25)
        assert abs(heads - n / 2) < 3 * sigma

    def test_embedded_pole_gives_certain_z(self):
        rng = np.random.default_rng(3)
        r_z = conditional_matrix(pauli_povm("Z"), sic_d2())
        for _ in range(50):
            j = sample_outcome(QUANTUM, np.array([1.0]), r_z, "z_embedding", rng)
            assert j == 0

    def test_invalid_regularized_point(self):
        with pytest.raises(RegionError):
            sample_outcome(QUANTUM, np.array([1.2, 0.0, 0.0]),
                           conditional_matrix(pauli_povm("X"), sic_d2()),
                           "none", np.random.default_rng(4))


class TestExpectationSteps:
    def test_two_certain_agents_stay_certain(self):
        a = Agent("a", CLASSICAL2, delta_ensemble([[1.0]], [1.0], Interval()), flip_menu())
        b = Agent("b", CLASSICAL2, delta_ensemble([[1.0]], [1.0], Interval()), flip_menu())
        trace = run(pair_spec([a, b], n_steps=20))
        for rec in trace.records:
            assert rec.agents[0].outcome == 0
            assert rec.agents[1].outcome == 0
            assert rec.agents[0].mean == (1.0,)
            assert rec.agents[1].mean == (1.0,)

    def test_swap_symmetry(self):
        # identically configured agents: swapping the labels leaves every
        # number in the records unchanged, since streams attach to slots
        t1 = run(pair_spec([coin_agent("a"), coin_agent("b")], n_steps=15, seed=9))
        t2 = run(pair_spec([coin_agent("b"), coin_agent("a")], n_steps=15, seed=9))
        for r1, r2 in zip(t1.records, t2.records):
            for i in range(2):
                assert r1.agents[i].outcome == r2.agents[i].outcome
                assert r1.agents[i].mean == r2.agents[i].mean
                assert r1.agents[i].action == r2.agents[i].action
            assert r1.metrics == r2.metrics

    def test_zero_steps(self):
        a = coin_agent("a")
        b = coin_agent("b")
        trace = run(pair_spec([a, b], n_steps=0))
        assert trace.records == []
        assert set(trace.final["summaries"]) == {"a", "b"}
        assert trace.initial["a"]["mean"][0] == pytest.approx(0.5, abs=1e-9)

    def test_run_determinism(self):
        cfg = replace(default_config("quantum_pair_flat", seed=13), n_steps=25)
        t1 = run_config(cfg)
        t2 = run_config(cfg)
        assert t1.records == t2.records

    def test_exogenous_limit_bit_exact(self):
        cfg = replace(default_config("coin_tomography", seed=99), n_steps=150)
        against_source = run_config(cfg)
        spec = build_runtime(cfg)
        delta_agent = Agent("source", CLASSICAL2,
                            delta_ensemble([[0.75]], [1.0], Interval()), flip_menu())
        spec_pair = RunSpec(scenario=cfg.scenario, seed=cfg.seed, n_steps=cfg.n_steps,
                            slots=(spec.slots[0], delta_agent),
                            incoming_reg=("none", "none"),
                            metrics_kind="coin_tomography", config=cfg.to_dict())
        against_delta = run(spec_pair)
        for r1, r2 in zip(against_source.records, against_delta.records):
            assert r1.agents[0] == r2.agents[0]
            assert r1.metrics == r2.metrics


class TestPriorSampling:
    def two_sided(self, name):
        return Agent(name, CLASSICAL2,
                     delta_ensemble([[0.0], [1.0]], [0.5, 0.5], Interval()),
                     flip_menu())

    def test_simultaneous_polarization_frequency(self):
        errors = 0
        n = 200
        for seed in range(n):
            slots = [self.two_sided("a"), self.two_sided("b")]
            try:
                run(pair_spec(slots, mode=PRIOR_SIMULTANEOUS, n_steps=5, seed=seed))
            except ImpossibleOutcomeError as err:
                errors += 1
                assert err.step == 2
        sigma = np.sqrt(n * 0.25)
        assert abs(errors - n / 2) < 3 * sigma

    def test_turn_based_agrees_after_one_round(self):
        for seed in range(100):
            slots = [self.two_sided("a"), self.two_sided("b")]
            trace = run(pair_spec(slots, mode=PRIOR_TURNS, n_steps=1, seed=seed))
            fa = trace.final["summaries"]["a"]
            fb = trace.final["summaries"]["b"]
            assert fa["mean"] == fb["mean"]
            assert fa["std"][0] == 0.0
            assert fb["std"][0] == 0.0

    def test_four_delta_polarization_reachable(self):
        polarized = 0
        for seed in range(60):
            cfg = replace(default_config("prior_qubits_turns"), seed=seed, n_steps=50)
            spec = build_runtime(cfg)
            try:
                run(spec)
            except ImpossibleOutcomeError:
                polarized += 1
                continue
            supports = [frozenset(map(tuple, s.ensemble.points[s.ensemble.weights > 0]))
                        for s in spec.slots]
            if not supports[0] & supports[1]:
                polarized += 1
        assert polarized > 0

    def test_expectation_sampling_never_impossible_with_interior_support(self):
        a = coin_agent("a", pdf=lambda t: beta_pdf(t, BetaParams(2, 2)))
        b = coin_agent("b", pdf=lambda t: beta_pdf(t, BetaParams(3, 1)))
        trace = run(pair_spec([a, b], n_steps=300, seed=5))
        assert len(trace.records) == 300


class TestSourceSlot:
    def test_source_never_consumes_agent_streams(self):
        src = ExogenousSource("s", np.array([0.75]))
        a = coin_agent("a", n=501)
        t1 = run(pair_spec([a, src], n_steps=30, seed=3, metrics="coin_tomography"))
        outcomes = [r.agents[0].outcome for r in t1.records]
        heads = outcomes.count(0)
        assert 10 <= heads <= 30
        assert t1.records[-1].metrics["running_frequency"] == heads / 30
