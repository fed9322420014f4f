"""
空间规划表数据模型
"""
import math
from enum import Enum
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

N_MAX = 8

Direction = Tuple[int, int, int]


class ActionType(str, Enum):
    """子目标动作类型（固定 7 个符号）"""
    MOVE = "move"
    PUSH = "push"
    GRASP = "grasp"
    RELEASE = "release"
    PRESS = "press"
    TURN = "turn"
    PLACE = "place"

    @property
    def is_terminal(self) -> bool:
        return self in TERMINAL_ACTIONS

    @property
    def index(self) -> int:
        return ACTION_VOCABULARY.index(self)


ACTION_VOCABULARY: List[ActionType] = list(ActionType)
TERMINAL_ACTIONS = frozenset(
    {ActionType.PUSH, ActionType.GRASP, ActionType.RELEASE, ActionType.PRESS, ActionType.PLACE}
)


class SpatialState(BaseModel):
    """末端位置、物体位置及相对偏移 Δp = p_obj − p_ee"""
    model_config = ConfigDict(frozen=True)

    p_ee: Tuple[float, float, float]
    p_obj: Tuple[float, float, float]
    delta_p: Tuple[float, float, float]

    @model_validator(mode="after")
    def _check_offset(self) -> "SpatialState":
        expected = tuple(o - e for o, e in zip(self.p_obj, self.p_ee))
        if tuple(self.delta_p) != expected:
            raise ValueError("delta_p 必须等于 p_obj − p_ee")
        return self

    @classmethod
    def from_positions(cls, p_ee, p_obj) -> "SpatialState":
        p_ee = tuple(float(c) for c in p_ee)
        p_obj = tuple(float(c) for c in p_obj)
        return cls(p_ee=p_ee, p_obj=p_obj, delta_p=tuple(o - e for o, e in zip(p_obj, p_ee)))

    @property
    def delta(self) -> np.ndarray:
        return np.asarray(self.delta_p, dtype=np.float64)


class Subgoal(BaseModel):
    """原子子目标：动作类型、符号方向向量、距离"""
    model_config = ConfigDict(frozen=True)

    action_type: ActionType
    direction: Direction = (0, 0, 0)
    distance: float = Field(default=0.0, ge=0.0)

    @field_validator("direction")
    @classmethod
    def _check_direction(cls, v: Direction) -> Direction:
        if any(c not in (-1, 0, 1) for c in v):
            raise ValueError(f"方向分量必须属于 {{-1,0,1}}: {v}")
        return v

    @field_validator("distance")
    @classmethod
    def _finite_distance(cls, v: float) -> float:
        """距离量化到 0.01，与规划表文本的两位小数一致"""
        if not math.isfinite(v):
            raise ValueError("距离必须有限")
        return round(v, 2) + 0.0

    @model_validator(mode="after")
    def _check_kind(self) -> "Subgoal":
        if self.action_type.is_terminal and (self.direction != (0, 0, 0) or self.distance != 0.0):
            raise ValueError(f"终止子目标 {self.action_type.value} 必须为零方向、零距离")
        if self.action_type is ActionType.MOVE and self.direction == (0, 0, 0):
            raise ValueError("move 子目标需要非零方向")
        return self

    @property
    def displacement(self) -> np.ndarray:
        """方向 × 距离（世界坐标位移）"""
        return np.asarray(self.direction, dtype=np.float64) * self.distance


class PlanTable(BaseModel):
    """有序子目标序列"""
    model_config = ConfigDict(frozen=True)

    subgoals: Tuple[Subgoal, ...] = Field(min_length=1, max_length=N_MAX)

    @model_validator(mode="after")
    def _check_terminal(self) -> "PlanTable":
        terminal_positions = [i for i, g in enumerate(self.subgoals) if g.action_type.is_terminal]
        if len(terminal_positions) > 1:
            raise ValueError("规划表最多包含一个终止子目标")
        if terminal_positions and terminal_positions[0] != len(self.subgoals) - 1:
            raise ValueError("终止子目标必须位于末尾")
        return self

    def __len__(self) -> int:
        return len(self.subgoals)

    @property
    def net_displacement(self) -> np.ndarray:
        """所有子目标位移之和"""
        total = np.zeros(3, dtype=np.float64)
        for g in self.subgoals:
            total += g.displacement
        return total
