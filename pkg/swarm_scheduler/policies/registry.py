"""Реестр политик и фабрика их создания."""

import logging

from swarm_scheduler.core.exceptions import PolicyNotFoundError
from swarm_scheduler.policies.base import (
    PolicyContext,
    PolicyKind,
    PolicySpec,
    SchedulingPolicy,
    parse_policy_kind,
)

logger = logging.getLogger(__name__)

# =============================================================================
# Реестр политик
# =============================================================================

_POLICY_REGISTRY: dict[PolicyKind, type[SchedulingPolicy]] = {}


def register_policy(cls: type[SchedulingPolicy]) -> type[SchedulingPolicy]:
    """Зарегистрировать класс политики (используется как декоратор).

    Args:
        cls: Подкласс SchedulingPolicy с атрибутом kind.

    Returns:
        Тот же класс.
    """
    _POLICY_REGISTRY[cls.kind] = cls
    return cls


def get_policy_class(kind: PolicyKind | str) -> type[SchedulingPolicy]:
    """Получить класс политики по виду.

    Args:
        kind: Вид политики или его строковое имя.

    Returns:
        Класс политики.

    Raises:
        PolicyNotFoundError: Если политика не зарегистрирована.
    """
    if isinstance(kind, str) and not isinstance(kind, PolicyKind):
        kind = parse_policy_kind(kind)
    if kind not in _POLICY_REGISTRY:
        raise PolicyNotFoundError(str(kind))
    return _POLICY_REGISTRY[kind]


def get_all_policies() -> dict[PolicyKind, type[SchedulingPolicy]]:
    """Копия реестра политик."""
    return _POLICY_REGISTRY.copy()


def is_policy_registered(name: str) -> bool:
    """Проверить, зарегистрирована ли политика с таким именем."""
    try:
        return parse_policy_kind(name) in _POLICY_REGISTRY
    except PolicyNotFoundError:
        return False


def create_policy(spec: PolicySpec, context: PolicyContext) -> SchedulingPolicy:
    """Создать экземпляр политики для одного узла.

    Raises:
        PolicyNotFoundError: Если вид политики не зарегистрирован.
    """
    cls = get_policy_class(spec.kind)
    logger.debug(f"Creating {cls.__name__} for node index {context.node_index}")
    return cls(spec.params, context)
