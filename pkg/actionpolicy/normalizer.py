"""
动作归一化
"""
from typing import Any, Dict

import numpy as np

from models.env import DELTA_MAX


class ActionNormalizer:
    """末端增量按 δ_max 缩放到 [−1, 1]，夹爪指令本身已在 [−1, 1]"""

    def __init__(self, delta_max: float = DELTA_MAX, gripper_max: float = 1.0):
        if delta_max <= 0 or gripper_max <= 0:
            raise ValueError("归一化尺度必须为正")
        self.delta_max = float(delta_max)
        self.gripper_max = float(gripper_max)

    @property
    def scale(self) -> np.ndarray:
        return np.array([self.delta_max] * 3 + [self.gripper_max], dtype=np.float64)

    def normalize(self, actions: np.ndarray) -> np.ndarray:
        return np.asarray(actions, dtype=np.float64) / self.scale

    def denormalize(self, actions: np.ndarray) -> np.ndarray:
        return np.asarray(actions, dtype=np.float64) * self.scale

    def state_dict(self) -> Dict[str, Any]:
        return {"delta_max": self.delta_max, "gripper_max": self.gripper_max}

    @classmethod
    def from_state_dict(cls, state: Dict[str, Any]) -> "ActionNormalizer":
        return cls(delta_max=state["delta_max"], gripper_max=state["gripper_max"])
