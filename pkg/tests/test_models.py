"""Тесты доменных типов."""

import pytest

from swarm_scheduler.core.exceptions import EnergyUnderflowError, InvalidArgumentError
from swarm_scheduler.core.models import (
    MIN_CAPACITANCE_F,
    CapacitorBank,
    EnergyLevel,
    Event,
    Mode,
    NodeState,
    SlotTime,
    TaskSpec,
)


class TestCapacitorBank:
    def test_from_capacitance_uses_half_cv_squared(self):
        bank = CapacitorBank.from_capacitance(0.01, 3.3)
        assert bank.capacity == pytest.approx(54.45)
        assert bank.capacitance_label == 0.01

    def test_capacitance_is_clamped_to_supported_range(self):
        bank = CapacitorBank.from_capacitance(1e-12)
        assert bank.capacitance_label == MIN_CAPACITANCE_F

    def test_initial_charge_is_clipped_to_capacity(self):
        bank = CapacitorBank.from_capacitance(2.2e-6, stored=1000.0)
        assert bank.stored == bank.capacity

    def test_stored_above_capacity_is_rejected(self):
        with pytest.raises(InvalidArgumentError):
            CapacitorBank(capacity=10.0, stored=11.0)

    @pytest.mark.parametrize("efficiency", [0.0, 1.5])
    def test_charge_efficiency_bounds(self, efficiency):
        with pytest.raises(InvalidArgumentError):
            CapacitorBank(capacity=10.0, charge_efficiency=efficiency)

    def test_leakage_of_one_is_rejected(self):
        with pytest.raises(InvalidArgumentError):
            CapacitorBank(capacity=10.0, leakage_rate=1.0)

    def test_draw(self):
        bank = CapacitorBank(capacity=10.0, stored=4.0)
        assert bank.draw(1.5).stored == pytest.approx(2.5)
        assert bank.stored == 4.0

    def test_draw_more_than_stored(self):
        with pytest.raises(EnergyUnderflowError) as exc_info:
            CapacitorBank(capacity=10.0, stored=1.0).draw(2.0)
        assert exc_info.value.requested == 2.0


class TestTaskAndEvent:
    def test_activation_energy(self, audio_task):
        assert audio_task.activation_energy == pytest.approx(26.72)

    def test_activation_energy_includes_sensing(self):
        task = TaskSpec(
            name="t", runtime_slots=2, energy_per_slot=3.0, sensing_energy=1.0
        )
        assert task.activation_energy == 7.0

    def test_task_needs_a_slot(self):
        with pytest.raises(InvalidArgumentError):
            TaskSpec(name="t", runtime_slots=0, energy_per_slot=1.0)

    def test_event_window(self):
        event = Event(id=0, start_slot=10, duration_slots=3, deadline_slot=20)
        assert event.end_slot == 13
        assert event.is_ongoing(12)
        assert not event.is_ongoing(13)
        assert not event.is_ongoing(9)

    def test_event_deadline_must_follow_start(self):
        with pytest.raises(InvalidArgumentError):
            Event(id=0, start_slot=10, duration_slots=1, deadline_slot=10)


class TestSmallTypes:
    def test_energy_level_in_millijoules(self):
        assert EnergyLevel(level=3, unit_energy=2.5).millijoules == 7.5

    def test_negative_slot_is_rejected(self):
        with pytest.raises(InvalidArgumentError):
            SlotTime(-1, 1.0)

    def test_node_state_defaults(self):
        node = NodeState(node_id=0, bank=CapacitorBank(capacity=5.0, stored=2.0))
        assert node.mode is Mode.ASLEEP
        assert node.stored == 2.0
        assert not node.is_active
        assert not node.is_busy
