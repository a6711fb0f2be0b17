"""Политики сна/пробуждения узлов роя."""

from swarm_scheduler.policies import baselines, heuristics, learning  # noqa: F401
from swarm_scheduler.policies.base import (
    Observation,
    PolicyContext,
    PolicyKind,
    PolicySpec,
    SchedulingPolicy,
    Verdict,
)
from swarm_scheduler.policies.dec_pomdp import DecPomdpSpec
from swarm_scheduler.policies.registry import create_policy, get_policy_class

__all__ = [
    "DecPomdpSpec",
    "Observation",
    "PolicyContext",
    "PolicyKind",
    "PolicySpec",
    "SchedulingPolicy",
    "Verdict",
    "create_policy",
    "get_policy_class",
]
