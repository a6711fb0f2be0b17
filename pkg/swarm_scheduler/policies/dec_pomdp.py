"""Описание задачи как децентрализованного POMDP.

Точный решатель не строится; описание фиксирует пространства состояний
и действий, из которых эвристики RBS и SRL выбирают локально.
"""

import itertools
import math
from collections.abc import Callable, Iterator
from dataclasses import dataclass

import numpy as np

from swarm_scheduler.core.exceptions import InvalidArgumentError
from swarm_scheduler.core.models import CaptureFeedback, JobOutcome
from swarm_scheduler.core.pcp import DutyCycleSet
from swarm_scheduler.policies.base import Observation
from swarm_scheduler.policies.learning import reward


@dataclass(frozen=True, slots=True)
class DecPomdpSpec:
    """Кортеж {N, S, A, T, R, Ω, O, h, b0} для роя.

    Attributes:
        n_agents: Число агентов N.
        duty_set: Набор циклов PCP; он же пространство действий агента.
        horizon: Горизонт h в слотах.
        reward_fn: Функция награды R.
    """

    n_agents: int
    duty_set: DutyCycleSet
    horizon: int
    reward_fn: Callable[[Observation, np.random.Generator], float] = reward

    def __post_init__(self) -> None:
        if self.n_agents < 1:
            raise InvalidArgumentError(
                "n_agents", self.n_agents, "нужен хотя бы один агент"
            )
        if self.horizon < 1:
            raise InvalidArgumentError("horizon", self.horizon, "горизонт < 1")

    @classmethod
    def from_duty_cycles(
        cls, n_agents: int, duty_set: DutyCycleSet, horizon: int
    ) -> "DecPomdpSpec":
        """Описание по набору циклов PCP."""
        return cls(n_agents=n_agents, duty_set=duty_set, horizon=horizon)

    @property
    def action_space(self) -> tuple[int, ...]:
        """Действия одного агента: циклы PCP."""
        return self.duty_set.cycles

    @property
    def observation_space(
        self,
    ) -> tuple[tuple[CaptureFeedback, ...], tuple[JobOutcome, ...]]:
        """Наблюдаемые сигналы помимо уровня энергии."""
        return tuple(CaptureFeedback), tuple(JobOutcome)

    @property
    def _slots(self) -> int:
        return min(self.n_agents, len(self.duty_set))

    @property
    def state_count(self) -> int:
        """Число состояний: размещения циклов по агентам."""
        return math.perm(len(self.duty_set), self._slots)

    @property
    def joint_action_count(self) -> int:
        """Размер совместного пространства действий."""
        return len(self.duty_set) ** self.n_agents

    def iter_states(self) -> Iterator[tuple[int, ...]]:
        """Лениво перечислить состояния (перестановки циклов)."""
        return itertools.permutations(self.duty_set.cycles, self._slots)

    def initial_belief(self, state: tuple[int, ...]) -> float:
        """Равномерное начальное убеждение b0."""
        valid = (
            len(state) == self._slots
            and len(set(state)) == len(state)
            and all(cycle in self.duty_set.cycles for cycle in state)
        )
        return 1.0 / self.state_count if valid else 0.0
