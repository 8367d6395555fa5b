import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbagents.agents import (
    Action,
    Agent,
    UtilityFn,
    broadcast_point,
    choose_action,
    expected_utility,
    predictive,
)
from qbagents.core_math import BetaParams, beta_pdf
from qbagents.errors import ValidationError
from qbagents.inference import delta_ensemble, grid_ensemble, sample_uniform
from qbagents.postulate import Interval, QubitBall, classical_postulate, quantum_postulate
from qbagents.quantum import conditional_matrix, pauli_povm, sic_d2

QUANTUM = quantum_postulate()
CLASSICAL2 = classical_postulate(2)


def pauli_menu():
    ref = sic_d2()
    return tuple(Action(ax, conditional_matrix(pauli_povm(ax), ref), ("+1", "-1"))
                 for ax in "XYZ")


def flip_menu():
    return (Action("flip", np.eye(2), ("heads", "tails")),)


def ball_agent(rng_seed=0, n=10_000, utility=None):
    ens = sample_uniform(QubitBall(), n, np.random.default_rng(rng_seed))
    return Agent("a", QUANTUM, ens, pauli_menu(), utility or UtilityFn())


class TestPredictive:
    def test_delta_eigenstate(self):
        ens = delta_ensemble([[1.0, 0.0, 0.0]], [1.0], QubitBall())
        agent = Agent("a", QUANTUM, ens, pauli_menu())
        q = predictive(agent, agent.action("X"))
        assert np.allclose(q, [1.0, 0.0], atol=1e-12)

    def test_uniform_ball_symmetric(self):
        agent = ball_agent(rng_seed=1, n=20_000)
        for ax in "XYZ":
            q = predictive(agent, agent.action(ax))
            assert np.allclose(q, 0.5, atol=0.02)

    def test_beta_grid_flip(self):
        params = BetaParams(772, 230)
        ens = grid_ensemble(Interval(), 10_001, pdf=lambda t: beta_pdf(t, params))
        agent = Agent("c", CLASSICAL2, ens, flip_menu())
        q = predictive(agent, agent.action("flip"))
        assert q[0] == pytest.approx(0.7705, abs=2e-4)
        assert q[1] == pytest.approx(0.2295, abs=2e-4)


class TestExpectedUtility:
    def test_uniform_utility_is_one(self):
        agent = ball_agent(rng_seed=2, n=2000)
        for action in agent.menu:
            assert expected_utility(agent, action) == pytest.approx(1.0, abs=1e-12)

    def test_biased_z_balanced_predictive(self):
        # predictive (1/2, 1/2): expected utility 0.49 + 0.51 = 1.0
        ens = delta_ensemble([[0.0, 0.0, 0.0]], [1.0], QubitBall())
        agent = Agent("b", QUANTUM, ens, pauli_menu(),
                      UtilityFn({"Z": (0.98, 1.02)}))
        assert expected_utility(agent, agent.action("Z")) == pytest.approx(1.0, abs=1e-12)

    def test_biased_z_certain_plus(self):
        # predictive (1, 0) makes the z action worth 0.98 < 1, so avoided
        ens = delta_ensemble([[0.0, 0.0, 1.0]], [1.0], QubitBall())
        agent = Agent("b", QUANTUM, ens, pauli_menu(),
                      UtilityFn({"Z": (0.98, 1.02)}))
        assert expected_utility(agent, agent.action("Z")) == pytest.approx(0.98, abs=1e-12)
        assert expected_utility(agent, agent.action("X")) == pytest.approx(1.0, abs=1e-12)


class TestChooseAction:
    def test_uniform_tie_frequencies(self):
        agent = ball_agent(rng_seed=3, n=500)
        rng = np.random.default_rng(30)
        counts = {"X": 0, "Y": 0, "Z": 0}
        n = 10_000
        for _ in range(n):
            counts[choose_action(agent, rng).name] += 1
        sigma = np.sqrt(n * (1 / 3) * (2 / 3))
        for c in counts.values():
            assert abs(c - n / 3) < 3 * sigma

    def test_dominant_action_always_chosen(self):
        ens = delta_ensemble([[0.0, 0.0, -1.0]], [1.0], QubitBall())
        agent = Agent("b", QUANTUM, ens, pauli_menu(),
                      UtilityFn({"Z": (0.98, 1.02)}))
        rng = np.random.default_rng(31)
        assert all(choose_action(agent, rng).name == "Z" for _ in range(100))

    def test_z_never_chosen_when_dominated(self):
        ens = delta_ensemble([[0.0, 0.0, 1.0]], [1.0], QubitBall())
        agent = Agent("b", QUANTUM, ens, pauli_menu(),
                      UtilityFn({"Z": (0.98, 1.02)}))
        rng = np.random.default_rng(32)
        assert all(choose_action(agent, rng).name != "Z" for _ in range(200))

    def test_same_seed_same_choice(self):
        agent = ball_agent(rng_seed=4, n=200)
        a = [choose_action(agent, np.random.default_rng(77)).name for _ in range(1)]
        b = [choose_action(agent, np.random.default_rng(77)).name for _ in range(1)]
        assert a == b

    @settings(max_examples=60, deadline=None)
    @given(shift=st.floats(-5, 5), scale=st.floats(0.1, 10))
    def test_argmax_invariant_under_affine_utilities(self, shift, scale):
        ens = delta_ensemble([[0.3, -0.2, 0.4]], [1.0], QubitBall())
        base = {"X": (1.0, 0.7), "Y": (0.9, 0.9), "Z": (1.1, 0.2)}
        shifted = {k: tuple(scale * u + shift for u in v) for k, v in base.items()}
        tie_sets = []
        for table in (base, shifted):
            agent = Agent("b", QUANTUM, ens, pauli_menu(), UtilityFn(table))
            eus = np.array([expected_utility(agent, a) for a in agent.menu])
            tie_sets.append(frozenset(np.flatnonzero(eus >= eus.max() - 1e-9 * max(1, scale))))
        assert tie_sets[0] == tie_sets[1]


class TestAgentValidation:
    def test_menu_dimension_checked(self):
        ens = grid_ensemble(Interval(), 51)
        with pytest.raises(ValidationError):
            Agent("a", CLASSICAL2, ens, pauli_menu())

    def test_region_compatibility_checked(self):
        ens = grid_ensemble(Interval(), 51)
        with pytest.raises(ValidationError):
            Agent("a", QUANTUM, ens, pauli_menu())

    def test_empty_menu_rejected(self):
        ens = grid_ensemble(Interval(), 51)
        with pytest.raises(ValidationError):
            Agent("a", CLASSICAL2, ens, ())

    def test_utility_row_length_checked(self):
        ens = grid_ensemble(Interval(), 51)
        with pytest.raises(ValidationError):
            Agent("a", CLASSICAL2, ens, flip_menu(),
                  UtilityFn({"flip": (1.0, 2.0, 3.0)}))

    def test_broadcast_is_posterior_mean(self):
        params = BetaParams(772, 230)
        ens = grid_ensemble(Interval(), 10_001, pdf=lambda t: beta_pdf(t, params))
        agent = Agent("c", CLASSICAL2, ens, flip_menu())
        assert broadcast_point(agent)[0] == pytest.approx(0.770459, abs=2e-4)
