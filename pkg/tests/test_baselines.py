"""Тесты базовых политик ORCL, GRDY, DC и ACES."""

import numpy as np
import pytest

from swarm_scheduler.core.engine import run_scenario
from swarm_scheduler.core.exceptions import ConfigurationError, InvalidArgumentError
from swarm_scheduler.core.models import CapacitorBank, Decision, NodeState, TaskSpec
from swarm_scheduler.policies.base import PolicyContext, Verdict
from swarm_scheduler.policies.baselines import (
    AcesMemory,
    AcesPolicy,
    DutyCyclePolicy,
    aces_decide,
    aces_periods,
    dc_required_nodes,
    dc_schedule,
    dc_sizing,
    greedy_decide,
    harvest_slots,
    oracle_decide,
)
from swarm_scheduler.policies.learning import LearningParams


def _node(stored: float, capacity: float = 100.0) -> NodeState:
    return NodeState(node_id=0, bank=CapacitorBank(capacity=capacity, stored=stored))


def _context(node_index: int = 0, n_nodes: int = 3, rate: float = 5.0) -> PolicyContext:
    return PolicyContext(
        task=TaskSpec(name="t", runtime_slots=1, energy_per_slot=1.0),
        bank=CapacitorBank(capacity=100.0),
        slot_duration=1.0,
        n_nodes=n_nodes,
        node_index=node_index,
        harvest_rates=(rate,) * n_nodes,
        duty_set=None,
        assignment=None,
        wake_threshold=1.0,
        unit_energy=1.0,
    )


class TestOracle:
    def test_argmax_of_total_energy(self):
        assert oracle_decide([(0, 2, 3), (1, 1, 1)], 2) == 0

    def test_nobody_has_enough(self):
        assert oracle_decide([(0, 0.5, 0.5), (1, 0.4, 0.4)], 2) is None

    def test_tie_goes_to_lower_id(self):
        assert oracle_decide([(0, 2, 2), (1, 3, 1)], 1) == 0
        assert oracle_decide([(5, 3, 1), (2, 2, 2)], 1) == 2

    def test_empty(self):
        with pytest.raises(InvalidArgumentError):
            oracle_decide([], 1.0)


class TestGreedy:
    def test_wakes_with_enough_energy(self):
        assert greedy_decide(_node(30.0), 26.72) is Decision.WAKE

    def test_sleeps_without_energy(self):
        assert greedy_decide(_node(0.0), 26.72) is Decision.SLEEP

    def test_threshold_is_inclusive(self):
        assert greedy_decide(_node(26.72), 26.72) is Decision.WAKE

    def test_positive_threshold(self):
        with pytest.raises(InvalidArgumentError):
            greedy_decide(_node(1.0), 0.0)


class TestDutyCycle:
    @pytest.mark.parametrize(
        ("t_e", "t_h", "n", "expected"),
        [(2, 4, 1, (6, 0)), (2, 5, 1, (8, 0)), (2, 4, 3, (6, 4))],
    )
    def test_schedule(self, t_e, t_h, n, expected):
        assert dc_schedule(t_e, t_h, n) == expected

    def test_node_index_is_one_based(self):
        with pytest.raises(InvalidArgumentError):
            dc_schedule(2, 4, 0)

    def test_harvest_slots(self, audio_task):
        bank = CapacitorBank(capacity=100.0)
        # 26.72 мДж при 5 мДж/слот: 6 слотов, из них 4 - выполнение
        assert harvest_slots(5.0, bank, audio_task) == 2
        assert harvest_slots(0.0, bank, audio_task) == 0

    def test_sizing_bases(self, audio_task):
        bank = CapacitorBank(capacity=100.0)
        mean = dc_sizing([5.0, 5.0], bank, audio_task, n_nodes=2, basis="mean")
        assert mean == (4, 4)
        lowest = dc_sizing([5.0, 1.0], bank, audio_task, n_nodes=2, basis="min")
        assert lowest == (4, 23)
        with pytest.raises(ConfigurationError):
            dc_sizing([5.0], bank, audio_task, n_nodes=1, basis="median")

    def test_required_nodes(self):
        assert dc_required_nodes(2, 6) == 3
        assert dc_required_nodes(2, 7) == 4

    def test_staggered_windows_cover_the_cycle(self):
        node = _node(50.0)
        policies = [DutyCyclePolicy({}, _context(node_index=i)) for i in range(3)]
        assert [p.duty_cycle for p in policies] == [3, 3, 3]
        for slot in range(3, 30):
            woken = [
                i
                for i, p in enumerate(policies)
                if p.decide(node, slot).decision is Decision.WAKE
            ]
            assert woken == [slot % 3]

    def test_scheduled_slot_without_energy_is_an_idle_violation(self):
        policy = DutyCyclePolicy({}, _context())
        expected = Verdict(Decision.SLEEP, idle_violation=True)
        assert policy.decide(_node(0.0), 3) == expected

    def test_explicit_timing_params(self):
        policy = DutyCyclePolicy({"t_e": 2, "t_h": 4}, _context(node_index=2))
        assert (policy.duty_cycle, policy.offset) == (6, 4)
        assert policy.active_window(_node(1.0)) == 2


class TestAces:
    def test_periods_in_slots(self):
        assert aces_periods(1.0) == (15, 60, 300, 900)
        assert aces_periods(5.0) == (3, 12, 60, 180)

    def test_slot_must_divide_fifteen_seconds(self):
        with pytest.raises(ConfigurationError):
            aces_periods(2.0)

    def test_greedy_choice(self):
        memory = AcesMemory(periods=aces_periods(1.0), epoch_slots=900, epsilon=0.0)
        memory.q = np.array([0.5, 0.2, 0.1, 0.0])
        params = LearningParams(epsilon=0.0)
        period = aces_decide(memory, 0, params, np.random.default_rng(0))
        assert period == 15

    def test_exploration_is_seed_deterministic(self):
        choices = []
        for _ in range(2):
            memory = AcesMemory(periods=aces_periods(1.0), epoch_slots=900, epsilon=1.0)
            rng = np.random.default_rng(42)
            params = LearningParams(epsilon=1.0, epsilon_decay=1.0)
            choices.append(
                [aces_decide(memory, epoch * 900, params, rng) for epoch in range(20)]
            )
        assert choices[0] == choices[1]
        assert set(choices[0]) <= {15, 60, 300, 900}

    def test_epoch_update_uses_funded_share(self):
        memory = AcesMemory(periods=aces_periods(1.0), epoch_slots=900, epsilon=0.0)
        params = LearningParams(alpha=0.1, gamma=0.0, epsilon=0.0)
        rng = np.random.default_rng(0)
        aces_decide(memory, 0, params, rng)
        memory.scheduled, memory.funded = 4, 4
        aces_decide(memory, 900, params, rng)
        assert memory.q[0] == pytest.approx(0.1)
        assert memory.scheduled == 0

    def test_decision_stays_within_an_epoch(self):
        memory = AcesMemory(periods=aces_periods(1.0), epoch_slots=900, epsilon=1.0)
        params = LearningParams(epsilon=1.0, epsilon_decay=1.0)
        rng = np.random.default_rng(3)
        first = aces_decide(memory, 0, params, rng)
        assert all(
            aces_decide(memory, slot, params, rng) == first for slot in range(1, 900)
        )

    def test_policy_counts_activations(self):
        policy = AcesPolicy({"epsilon": 0.0}, _context())
        node = _node(50.0)
        policy.setup(node)
        assert policy.decide(node, 0).decision is Decision.WAKE
        assert policy.decide(node, 1).decision is Decision.SLEEP
        assert policy.decide(node, 15).decision is Decision.WAKE
        memory = node.policy_memory["aces"]
        assert (memory.scheduled, memory.funded) == (2, 2)
        policy.on_brownout(node, 16)
        assert memory.epoch_reward() == pytest.approx(0.0)


class TestOracleProperties:
    @pytest.mark.parametrize("seed", range(20))
    def test_choice_survives_common_scaling(self, seed):
        rng = np.random.default_rng(seed)
        draws = rng.integers(0, 20, (6, 2))
        nodes = [(i, float(h), float(c)) for i, (h, c) in enumerate(draws)]
        e_min = float(rng.integers(1, 30))
        chosen = oracle_decide(nodes, e_min)
        for power in (-3, 1, 5):
            factor = 2.0**power
            scaled = [(i, h * factor, c * factor) for i, h, c in nodes]
            assert oracle_decide(scaled, e_min * factor) == chosen

    @pytest.mark.parametrize("seed", range(20))
    def test_never_picks_a_node_below_minimum(self, seed):
        rng = np.random.default_rng(seed)
        draws = rng.uniform(0, 3, (5, 2))
        nodes = [(i, float(h), float(c)) for i, (h, c) in enumerate(draws)]
        chosen = oracle_decide(nodes, 4.0)
        totals = {i: h + c for i, h, c in nodes}
        if chosen is None:
            assert all(total < 4.0 for total in totals.values())
        else:
            assert totals[chosen] >= 4.0
            assert totals[chosen] == max(totals.values())


class TestAcesSchedule:
    TASK = TaskSpec(name="t4", runtime_slots=4, energy_per_slot=1.0)

    def test_full_activation_every_period(self, make_scenario):
        scenario = make_scenario(
            np.full((1, 90), 50.0), "ACES", task=self.TASK, params={"epsilon": 0.0}
        )
        activity = run_scenario(scenario).activity[:, 0]
        assert activity.reshape(6, 15).sum(axis=1).tolist() == [4] * 6
        assert np.flatnonzero(activity[:15]).tolist() == [0, 1, 2, 3]

    def test_nodes_start_on_staggered_phases(self, make_scenario):
        scenario = make_scenario(
            np.full((4, 30), 50.0), "ACES", task=self.TASK, params={"epsilon": 0.0}
        )
        activity = run_scenario(scenario).activity
        first = [int(np.flatnonzero(activity[:, node])[0]) for node in range(4)]
        assert first == [0, 4, 8, 12]
        assert (activity.sum(axis=1)[:15] == 1).all()
