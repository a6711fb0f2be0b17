"""Тесты Q-обучения, функции награды и SRL."""

import numpy as np
import pytest

from swarm_scheduler.core.exceptions import InvalidArgumentError
from swarm_scheduler.core.models import (
    CapacitorBank,
    CaptureFeedback,
    EnergyLevel,
    JobOutcome,
    NodeState,
    SlotTime,
    TaskSpec,
)
from swarm_scheduler.core.pcp import Assignment, select_duty_cycles
from swarm_scheduler.policies.base import Observation, PolicyContext
from swarm_scheduler.policies.learning import (
    LearningParams,
    SrlMemory,
    SrlPolicy,
    energy_bucket,
    epsilon_greedy,
    q_update,
    reward,
    ranked_index,
    srl_update,
)


def _observation(
    feedback: CaptureFeedback = CaptureFeedback.NONE, outcome: JobOutcome | None = None
) -> Observation:
    return Observation(
        slot=SlotTime(0, 1.0),
        local_energy=EnergyLevel(0, 1.0),
        stored=0.0,
        capture_feedback=feedback,
        job_outcome=outcome,
    )



def _srl(params: dict, **context_kwargs) -> tuple[SrlPolicy, NodeState]:
    """Политика SRL узла 0 из шести с одинаковыми номинальными скоростями."""
    duty_set = select_duty_cycles(3, 15)
    context_kwargs.setdefault("rng", np.random.default_rng(0))
    context = PolicyContext(
        task=TaskSpec(name="t", runtime_slots=1, energy_per_slot=1.0),
        bank=CapacitorBank(capacity=100.0),
        slot_duration=1.0,
        n_nodes=6,
        node_index=0,
        harvest_rates=(1.0,) * 6,
        duty_set=duty_set,
        assignment=Assignment(pairs=tuple(enumerate(duty_set.cycles))),
        wake_threshold=1.0,
        unit_energy=1.0,
        **context_kwargs,
    )
    policy = SrlPolicy(params, context)
    node = NodeState(node_id=0, bank=CapacitorBank(capacity=100.0, stored=2.0))
    policy.setup(node)
    return policy, node


class TestPrimitives:
    def test_q_update_arithmetic(self):
        row = np.zeros(3)
        assert q_update(row, 0, 1.0, 0.0, 0.1, 0.0) == pytest.approx(0.1)
        assert row[0] == pytest.approx(0.1)

    def test_q_update_bootstraps(self):
        row = np.zeros(2)
        assert q_update(row, 1, 0.0, 2.0, 0.5, 0.9) == pytest.approx(0.9)

    def test_greedy_picks_argmax(self):
        values = np.array([0.0, 0.7, 0.3])
        assert epsilon_greedy(values, 0.0, np.random.default_rng(0)) == 1

    def test_greedy_tie_takes_lower_index(self):
        assert epsilon_greedy(np.array([0.2, 0.2]), 0.0, np.random.default_rng(0)) == 0

    def test_no_actions(self):
        with pytest.raises(InvalidArgumentError):
            epsilon_greedy(np.array([]), 0.0, np.random.default_rng(0))

    @pytest.mark.parametrize("gamma", [0.0, 0.9])
    def test_bandit_converges_to_paying_action(self, gamma):
        rng = np.random.default_rng(123)
        row = np.zeros(5)
        epsilon = 1.0
        for _ in range(10_000):
            action = epsilon_greedy(row, epsilon, rng)
            paid = 1.0 if action == 3 else 0.0
            q_update(row, action, paid, float(row.max()), 0.1, gamma)
            epsilon = max(0.01, epsilon * 0.999)
        assert int(np.argmax(row)) == 3


    @pytest.mark.parametrize("gamma", [0.5, 0.9])
    def test_q_stays_within_discounted_bound(self, gamma):
        rng = np.random.default_rng(7)
        memory = SrlMemory(n_actions=4, epsilon=1.0)
        params = LearningParams(alpha=0.3, gamma=gamma, epsilon=1.0, epsilon_decay=1.0)
        bound = 1.0 / (1.0 - gamma)
        for _ in range(20_000):
            state = (int(rng.integers(3)), int(rng.integers(4)))
            srl_update(memory, state, float(rng.uniform(-1.0, 1.0)), params, rng)
        values = np.concatenate(list(memory.q.values()))
        assert np.abs(values).max() <= bound + 1e-9

class TestLearningParams:
    def test_defaults(self):
        params = LearningParams()
        assert (params.alpha, params.gamma, params.epsilon) == (0.1, 0.9, 0.2)

    def test_from_mapping_ignores_foreign_keys(self):
        params = LearningParams.from_mapping({"alpha": 0.5, "energy_buckets": 4})
        assert params.alpha == 0.5

    @pytest.mark.parametrize("field", ["alpha", "epsilon_decay"])
    def test_open_zero(self, field):
        with pytest.raises(InvalidArgumentError):
            LearningParams(**{field: 0.0})

    def test_gamma_above_one(self):
        with pytest.raises(InvalidArgumentError):
            LearningParams(gamma=1.5)


class TestReward:
    def test_processed_from_start(self):
        observation = _observation(
            CaptureFeedback.CAPTURED_FROM_START, JobOutcome.PROCESSED_IN_DEADLINE
        )
        assert reward(observation, np.random.default_rng(0)) == 1.0

    def test_mid_event_is_random_negative(self):
        observation = _observation(CaptureFeedback.CAPTURED_MID_EVENT)
        values = [
            reward(observation, np.random.default_rng(seed)) for seed in range(50)
        ]
        assert all(-1.0 <= value < 0.0 for value in values)
        first = reward(observation, np.random.default_rng(8))
        assert reward(observation, np.random.default_rng(8)) == first

    def test_nothing_happened(self):
        assert reward(_observation(), np.random.default_rng(0)) == 0.0

    def test_capture_without_processing(self):
        observation = _observation(
            CaptureFeedback.CAPTURED_FROM_START, JobOutcome.MISSED_DEADLINE
        )
        assert reward(observation, np.random.default_rng(0)) == 0.0


class TestSrl:
    def test_energy_bucket(self):
        assert energy_bucket(10.0, 3.0, 8) == 3
        assert energy_bucket(100.0, 1.0, 8) == 7

    def test_first_update_only_selects(self):
        memory = SrlMemory(n_actions=3, epsilon=0.0)
        params = LearningParams(epsilon=0.0)
        action = srl_update(memory, (0, 0), 5.0, params, np.random.default_rng(0))
        assert action == 0
        assert memory.state == (0, 0)
        assert not memory.q[(0, 0)].any()

    def test_update_credits_previous_action(self):
        memory = SrlMemory(n_actions=3, epsilon=0.0, state=(1, 0), action=2)
        params = LearningParams(alpha=0.1, gamma=0.0, epsilon=0.0)
        srl_update(memory, (1, 2), 1.0, params, np.random.default_rng(0))
        assert memory.q[(1, 0)][2] == pytest.approx(0.1)

    def test_epsilon_decays(self):
        memory = SrlMemory(n_actions=2, epsilon=0.5)
        params = LearningParams(epsilon=0.5, epsilon_decay=0.5, epsilon_min=0.2)
        rng = np.random.default_rng(0)
        srl_update(memory, (0, 0), 0.0, params, rng)
        assert memory.epsilon == 0.25
        srl_update(memory, (0, 0), 0.0, params, rng)
        assert memory.epsilon == 0.2

    def test_policy_accumulates_reward_until_cycle_end(self):
        policy, node = _srl({"epsilon": 0.0, "gamma": 0.0, "alpha": 0.5})
        start_state = node.policy_memory["srl"].state
        observation = _observation(
            CaptureFeedback.CAPTURED_FROM_START, JobOutcome.PROCESSED_IN_DEADLINE
        )
        gained = policy.observe(node, observation)
        assert gained == 1.0
        assert node.policy_memory["srl"].pending_reward == 1.0
        policy.decide(node, 3)
        memory = node.policy_memory["srl"]
        assert memory.pending_reward == 0.0
        assert memory.q[start_state][0] == pytest.approx(0.5)
        assert node.duty_cycle == 3

    @pytest.mark.parametrize(
        ("rate", "node_index", "nominal", "size", "expected"),
        [
            (5.0, 1, (9.0, 5.0, 1.0), 3, 1),
            (10.0, 2, (9.0, 5.0, 1.0), 3, 0),
            (0.5, 0, (9.0, 5.0, 1.0), 3, 2),
            (5.0, 2, (9.0, 5.0, 5.0), 3, 2),
            (0.0, 0, (9.0, 5.0, 1.0, 1.0), 2, 1),
        ],
    )
    def test_ranked_index(self, rate, node_index, nominal, size, expected):
        assert ranked_index(rate, node_index, nominal, size) == expected

    def test_prior_follows_measured_harvest(self):
        policy, node = _srl({"epsilon": 0.0})
        memory = node.policy_memory["srl"]
        assert int(np.argmax(policy.prior(memory))) == 0
        policy.on_span_end(node, np.full(40, 0.05), np.zeros(40))
        assert len(memory.harvested) == max(policy.cycles)
        prior = policy.prior(memory)
        assert int(np.argmax(prior)) == len(policy.cycles) - 1
        assert prior.max() == 10.0

    def test_prior_steers_cycle_choice(self):
        policy, node = _srl({"epsilon": 0.0})
        for _ in range(20):
            policy.on_slot_end(node, 0, 0.05, 0.0)
        policy.decide(node, 3)
        assert node.duty_cycle == policy.cycles[-1]

    def test_zero_prior_weight_keeps_pure_q(self):
        policy, node = _srl({"epsilon": 0.0, "prior_weight": 0.0})
        policy.on_span_end(node, np.full(20, 0.05), np.zeros(20))
        policy.decide(node, 3)
        assert node.duty_cycle == policy.cycles[0]

    def test_negative_prior_weight(self):
        with pytest.raises(InvalidArgumentError):
            _srl({"prior_weight": -1.0})

    def test_penalty_draws_from_reward_stream(self):
        policy, node = _srl(
            {"epsilon": 0.0},
            rng=np.random.default_rng(0),
            reward_rng=np.random.default_rng(1),
        )
        before = policy.context.rng.bit_generator.state
        gained = policy.observe(node, _observation(CaptureFeedback.CAPTURED_MID_EVENT))
        assert policy.context.rng.bit_generator.state == before
        assert gained == reward(
            _observation(CaptureFeedback.CAPTURED_MID_EVENT), np.random.default_rng(1)
        )
