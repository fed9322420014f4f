"""
条件编码模块
"""

from .encoder import (
    ConditionConfig, GlobalCondition, PlanTokens, SubplanEncoder, TASK_VOCABULARY,
    action_index, discretize_direction, task_index, tokenize_plan
)

__all__ = [
    "ConditionConfig", "GlobalCondition", "PlanTokens", "SubplanEncoder", "TASK_VOCABULARY",
    "action_index", "discretize_direction", "task_index", "tokenize_plan",
]
