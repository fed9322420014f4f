"""
扩散动作策略模块
"""
from .encoder import CoordEncoder, ObsEncoder
from .normalizer import ActionNormalizer
from .policy import (
    ACTION_DIM,
    ActionSequence,
    DiffusionPolicy,
    PolicyBatch,
    PolicyModelConfig,
    PolicySample,
    build_policy,
    cosine_beta_schedule,
    sample_goal_index,
    stack_observations,
)
from .unet1d import ConditionalResidualBlock1D, ConditionalUnet1D

__all__ = [
    "ACTION_DIM",
    "ActionNormalizer",
    "ActionSequence",
    "ConditionalResidualBlock1D",
    "ConditionalUnet1D",
    "CoordEncoder",
    "DiffusionPolicy",
    "ObsEncoder",
    "PolicyBatch",
    "PolicyModelConfig",
    "PolicySample",
    "build_policy",
    "cosine_beta_schedule",
    "sample_goal_index",
    "stack_observations",
]
