"""Тесты квантования энергии и шага накопителя."""

import numpy as np
import pytest

from swarm_scheduler.core.energy import capacitor_step, quantize_energy
from swarm_scheduler.core.exceptions import EnergyUnderflowError, InvalidArgumentError
from swarm_scheduler.core.models import CapacitorBank


def _available(bank: CapacitorBank, harvested: float) -> float:
    return bank.stored * (1 - bank.leakage_rate) + bank.charge_efficiency * harvested


class TestQuantizeEnergy:
    @pytest.mark.parametrize(
        ("raw", "unit", "level"),
        [(10.0, 3.0, 3), (2.9, 3.0, 0), (26.72, 26.72, 1)],
    )
    def test_floor_levels(self, raw, unit, level):
        assert quantize_energy(raw, unit).level == level

    @pytest.mark.parametrize("unit", [0.1, 0.3, 1.1, 6.68])
    def test_integer_multiples_are_exact(self, unit):
        for k in range(50):
            assert quantize_energy(k * unit, unit).level == k

    def test_monotone_in_raw(self):
        raws = np.linspace(0.0, 100.0, 1001)
        levels = [quantize_energy(float(raw), 3.7).level for raw in raws]
        assert all(a <= b for a, b in zip(levels, levels[1:], strict=False))

    def test_non_positive_unit(self):
        with pytest.raises(InvalidArgumentError):
            quantize_energy(5.0, 0.0)

    def test_negative_raw(self):
        with pytest.raises(InvalidArgumentError):
            quantize_energy(-1.0, 1.0)


class TestCapacitorStep:
    def test_charge_and_consume(self):
        report = capacitor_step(CapacitorBank(capacity=10.0, stored=5.0), 3.0, 2.0)
        assert report.bank.stored == pytest.approx(6.0)
        assert report.overflow == 0.0

    def test_overflow_at_capacity(self):
        report = capacitor_step(CapacitorBank(capacity=10.0, stored=10.0), 5.0, 0.0)
        assert report.bank.stored == 10.0
        assert report.overflow == pytest.approx(5.0)

    def test_pure_leakage(self):
        bank = CapacitorBank(capacity=10.0, stored=8.0, leakage_rate=0.125)
        report = capacitor_step(bank, 0.0, 0.0)
        assert report.bank.stored == pytest.approx(7.0)
        assert report.leaked == pytest.approx(1.0)

    def test_leakage_applies_before_charge(self):
        bank = CapacitorBank(
            capacity=100.0, stored=10.0, leakage_rate=0.5, charge_efficiency=0.5
        )
        report = capacitor_step(bank, 10.0, 0.0)
        assert report.bank.stored == pytest.approx(10.0)

    def test_underflow(self):
        with pytest.raises(EnergyUnderflowError):
            capacitor_step(CapacitorBank(capacity=10.0, stored=1.0), 0.5, 2.0)

    def test_negative_harvest(self):
        with pytest.raises(InvalidArgumentError):
            capacitor_step(CapacitorBank(capacity=10.0), -1.0, 0.0)

    def test_stored_stays_within_bounds_under_random_load(self):
        rng = np.random.default_rng(5)
        bank = CapacitorBank(
            capacity=20.0, stored=5.0, leakage_rate=0.01, charge_efficiency=0.9
        )
        for _ in range(2000):
            harvested = float(rng.uniform(0.0, 8.0))
            available = _available(bank, harvested)
            consumed = float(rng.uniform(0.0, available))
            bank = capacitor_step(bank, harvested, consumed).bank
            assert 0.0 <= bank.stored <= bank.capacity

    def test_balance_is_conserved(self):
        rng = np.random.default_rng(9)
        bank = CapacitorBank(
            capacity=15.0, stored=3.0, leakage_rate=0.02, charge_efficiency=0.8
        )
        initial = bank.stored
        harvested_total = consumed_total = overflow_total = leaked_total = 0.0
        for _ in range(500):
            harvested = float(rng.uniform(0.0, 6.0))
            available = _available(bank, harvested)
            consumed = float(rng.uniform(0.0, available))
            report = capacitor_step(bank, harvested, consumed)
            bank = report.bank
            harvested_total += bank.charge_efficiency * harvested
            consumed_total += consumed
            overflow_total += report.overflow
            leaked_total += report.leaked
        lhs = consumed_total + overflow_total + leaked_total + bank.stored
        assert lhs == pytest.approx(initial + harvested_total, rel=1e-6)
