"""Тесты статического расписания PCP и эвристики RBS."""

import numpy as np
import pytest

from swarm_scheduler.core.exceptions import InvalidArgumentError
from swarm_scheduler.core.models import CapacitorBank, Decision, NodeState, TaskSpec
from swarm_scheduler.core.pcp import Assignment, OverlapMode, select_duty_cycles
from swarm_scheduler.policies.base import SLEEP, WAKE, PolicyContext
from swarm_scheduler.policies.heuristics import (
    RbsMemory,
    RbsPolicy,
    harvest_changed,
    is_scheduled,
    pcp_static_decide,
    rbs_feedback,
    rbs_redirect,
    rbs_transition,
)

CYCLES = (3, 4, 5, 7, 11, 13)


def _node(stored: float, node_id: int = 0) -> NodeState:
    return NodeState(node_id=node_id, bank=CapacitorBank(capacity=100.0, stored=stored))


class TestPcpStatic:
    assignment = Assignment(pairs=((0, 3),))

    def test_wake_on_multiple_of_cycle(self):
        assert pcp_static_decide(_node(50.0), self.assignment, 9, 26.72) == WAKE

    def test_sleep_off_schedule(self):
        assert pcp_static_decide(_node(50.0), self.assignment, 10, 26.72) == SLEEP

    def test_idle_violation_without_energy(self):
        verdict = pcp_static_decide(_node(10.0), self.assignment, 9, 26.72)
        assert verdict.decision is Decision.SLEEP
        assert verdict.idle_violation

    def test_unassigned_node_sleeps(self):
        node = _node(50.0, node_id=7)
        assert pcp_static_decide(node, self.assignment, 9, 1.0) == SLEEP

    def test_hyperperiod_wrap(self):
        # 16 mod 15 = 1: по модулю гиперпериода слот не кратен 4
        assert is_scheduled(16, 4)
        assert not is_scheduled(16, 4, hyper=15)
        assert is_scheduled(19, 4, hyper=15)

    def test_phase_shifts_schedule(self):
        assert not is_scheduled(1, 3, phase=2)
        assert is_scheduled(5, 3, phase=2)


class TestRbsSearch:
    def test_choice_within_range_and_seeded(self):
        picks = []
        for _ in range(2):
            rng = np.random.default_rng(7)
            memory = RbsMemory(lo=0, hi=5, index=0)
            picks.append([rbs_transition(memory, CYCLES, rng) for _ in range(50)])
        assert picks[0] == picks[1]
        assert set(picks[0]) <= set(CYCLES)

    def test_singleton_range_is_forced(self):
        memory = RbsMemory(lo=2, hi=2, index=0)
        assert rbs_transition(memory, CYCLES, np.random.default_rng(0)) == 5
        assert memory.index == 2

    def test_infeasible_moves_lower_bound(self):
        memory = RbsMemory(lo=0, hi=5, index=2)
        rbs_feedback(memory, infeasible=True, surplus=False, size=6)
        assert memory.lo == 3

    def test_surplus_moves_upper_bound(self):
        memory = RbsMemory(lo=0, hi=5, index=2)
        rbs_feedback(memory, infeasible=False, surplus=True, size=6)
        assert memory.hi == 1

    def test_surplus_at_lower_bound_keeps_cycle(self):
        memory = RbsMemory(lo=2, hi=5, index=2)
        rbs_feedback(memory, infeasible=False, surplus=True, size=6)
        assert (memory.lo, memory.hi, memory.index) == (2, 5, 2)

    def test_feedback_never_goes_below_floor(self):
        memory = RbsMemory(lo=0, hi=5, index=1, floor=3)
        rbs_feedback(memory, infeasible=True, surplus=False, size=6)
        assert memory.lo == 3
        memory = RbsMemory(lo=0, hi=5, index=3, floor=3)
        rbs_feedback(memory, infeasible=False, surplus=True, size=6)
        assert memory.hi == 5

    @pytest.mark.parametrize(
        "index, floor, rising, expected",
        [
            (3, 1, True, (1, 2)),
            (3, 1, False, (4, 5)),
            (3, 5, False, (5, 5)),
            (0, 0, True, (0, 0)),
            (5, 0, False, (5, 5)),
        ],
    )
    def test_redirect_follows_energy_change(self, index, floor, rising, expected):
        memory = RbsMemory(lo=0, hi=5, index=index, floor=floor)
        rbs_redirect(memory, rising=rising, size=6)
        assert (memory.lo, memory.hi) == expected

    def test_crossed_bounds_reset(self):
        memory = RbsMemory(lo=5, hi=5, index=5)
        rbs_feedback(memory, infeasible=True, surplus=False, size=6)
        assert (memory.lo, memory.hi) == (0, 5)

    def test_matches_range_tracking_oracle(self):
        rng = np.random.default_rng(1)
        feedback_rng = np.random.default_rng(2)
        memory = RbsMemory(lo=0, hi=5, index=0)
        lo, hi = 0, 5
        for _ in range(500):
            rbs_transition(memory, CYCLES, rng)
            assert lo <= memory.index <= hi
            infeasible = bool(feedback_rng.random() < 0.5)
            surplus = not infeasible
            rbs_feedback(memory, infeasible=infeasible, surplus=surplus, size=6)
            if infeasible:
                lo = memory.index + 1 if memory.index + 1 <= hi else 0
                hi = hi if memory.index + 1 <= hi else 5
            elif memory.index > lo:
                hi = memory.index - 1
            assert (memory.lo, memory.hi) == (lo, hi)

    def test_empty_cycles(self):
        with pytest.raises(InvalidArgumentError):
            rbs_transition(RbsMemory(lo=0, hi=0, index=0), (), np.random.default_rng(0))

    def test_harvest_change_detection(self):
        assert not harvest_changed([10.0, 10.0], 10.0, 0.2)
        assert harvest_changed([13.0, 13.0], 10.0, 0.2)
        assert harvest_changed([1.0], 0.0, 0.2)
        assert not harvest_changed([], 10.0, 0.2)


class TestRbsPolicy:
    @staticmethod
    def _context(**overrides):
        duty_set = select_duty_cycles(3, 15)
        options = {
            "task": TaskSpec(name="t", runtime_slots=1, energy_per_slot=1.0),
            "bank": CapacitorBank(capacity=100.0),
            "slot_duration": 1.0,
            "n_nodes": 6,
            "node_index": 0,
            "harvest_rates": (1.0,) * 6,
            "duty_set": duty_set,
            "assignment": Assignment(pairs=tuple(enumerate(duty_set.cycles))),
            "wake_threshold": 1.0,
            "unit_energy": 1.0,
            "rng": np.random.default_rng(4),
            **overrides,
        }
        return PolicyContext(**options)

    @pytest.mark.parametrize(
        ("rate", "overrides", "expected"),
        [
            (0.34, {}, 0),
            (0.2, {}, 1),
            (0.07, {}, 4),
            (0.0, {}, 5),
            (0.2, {"pcp_overlap": OverlapMode.SHARED}, 2),
            (0.2, {"wrap_hyperperiod": False}, 2),
        ],
    )
    def test_floor_counts_scheduled_wakes(self, rate, overrides, expected):
        # за T = 15 цикл 4 владеет только позициями 4 и 8
        assert RbsPolicy({}, self._context(**overrides)).floor_index(rate) == expected

    def test_threshold_must_be_positive(self):
        with pytest.raises(InvalidArgumentError):
            RbsPolicy({"change_threshold": 0.0}, self._context())

    def test_starts_from_assigned_cycle(self):
        policy = RbsPolicy({}, self._context())
        node = _node(50.0, node_id=2)
        policy.setup(node)
        assert node.duty_cycle == 5
        assert node.policy_memory["rbs"].index == 2
        # поиск не уходит короче цикла из плана до изменения сбора
        assert node.policy_memory["rbs"].lo == 2

    def test_idle_violation_triggers_a_new_search(self):
        policy = RbsPolicy({}, self._context())
        node = _node(0.0, node_id=0)
        policy.setup(node)
        for slot in range(3):
            policy.on_slot_end(node, slot, 0.0, 0.0)
        verdict = policy.decide(node, 3)
        assert verdict.idle_violation
        # первая граница цикла фиксирует опорную скорость
        assert node.policy_memory["rbs"].reference_rate == 0.0
        for slot in range(4, 6):
            policy.on_slot_end(node, slot, 0.0, 0.0)
        policy.decide(node, 6)
        memory = node.policy_memory["rbs"]
        # при нулевом сборе допустим только самый длинный цикл
        assert memory.floor == len(CYCLES) - 1
        assert memory.lo == memory.floor
        assert node.duty_cycle == CYCLES[-1]
