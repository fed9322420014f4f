"""
合成操作环境模块
"""

from .tasks import DEFAULT_TASKS, EE_STARTS, JITTER_MAX, default_task, load_tasks, reset
from .dynamics import step, get_spatial_state, check_success
from .renderer import render, world_to_pixel, pixel_to_world, marker_centroid, marker_mask
from .expert import expert_action
from .gym_env import SyntheticManipulationEnv, FrozenEEWrapper

__all__ = [
    "DEFAULT_TASKS", "EE_STARTS", "JITTER_MAX", "default_task", "load_tasks", "reset",
    "step", "get_spatial_state", "check_success",
    "render", "world_to_pixel", "pixel_to_world", "marker_centroid", "marker_mask",
    "expert_action",
    "SyntheticManipulationEnv", "FrozenEEWrapper",
]
