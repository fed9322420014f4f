"""
合成操作环境数据模型
"""
import math
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from models.errors import ConfigurationError

Vec3 = Tuple[float, float, float]

# 环境常量
DELTA_MAX = 0.05
GRASP_RADIUS = 0.03
CONTACT_RADIUS = 0.03
DEFAULT_GOAL_RADIUS = 0.05
DEFAULT_RESOLUTION = 32


class TaskId(str, Enum):
    """任务枚举"""
    REACH = "reach"  # 到达/按压
    PUSH = "push"  # 推动
    PICK_PLACE = "pick_place"  # 抓取放置

    @classmethod
    def parse(cls, value) -> "TaskId":
        """解析任务符号，未知任务抛出配置错误"""
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value))
        except ValueError:
            raise ConfigurationError(f"未知任务: {value!r}") from None


def _in_unit_cube(v: Vec3) -> bool:
    return all(math.isfinite(c) and 0.0 <= c <= 1.0 for c in v)


class GoalRegion(BaseModel):
    """目标区域（球心 + 半径，世界坐标）"""
    model_config = ConfigDict(frozen=True)

    center: Vec3
    radius: float = Field(default=DEFAULT_GOAL_RADIUS, gt=0.0)

    @field_validator("center")
    @classmethod
    def _check_center(cls, v: Vec3) -> Vec3:
        if not _in_unit_cube(v):
            raise ValueError(f"目标中心必须位于 [0,1]^3 内: {v}")
        return v


class TaskSpec(BaseModel):
    """任务定义"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    task_id: TaskId
    object_start: Vec3
    goal_region: GoalRegion
    max_steps: int = Field(default=120, gt=0)
    ee_start: Optional[Vec3] = Field(default=None, description="末端初始位置，缺省按任务取值")

    @field_validator("object_start", "ee_start")
    @classmethod
    def _check_position(cls, v: Optional[Vec3]) -> Optional[Vec3]:
        if v is not None and not _in_unit_cube(v):
            raise ValueError(f"位置必须位于 [0,1]^3 内: {v}")
        return v


class EnvState(BaseModel):
    """环境状态（不可变，step 返回新状态）"""
    model_config = ConfigDict(frozen=True)

    ee_pos: Vec3
    obj_pos: Vec3
    gripper_closed: bool = False
    attached: bool = False
    step_count: int = Field(default=0, ge=0)
    task: TaskSpec
    rng_seed: int = 0

    @model_validator(mode="after")
    def _check_invariants(self) -> "EnvState":
        if not (_in_unit_cube(self.ee_pos) and _in_unit_cube(self.obj_pos)):
            raise ValueError("末端和物体位置必须位于 [0,1]^3 内")
        if self.attached and not self.gripper_closed:
            raise ValueError("attached 要求夹爪闭合")
        if self.attached and np.linalg.norm(self.obj - self.ee) > GRASP_RADIUS + 1e-9:
            raise ValueError("attached 要求物体位于抓取半径内")
        if self.step_count > self.task.max_steps:
            raise ValueError("step_count 超过 max_steps")
        return self

    @property
    def ee(self) -> np.ndarray:
        return np.asarray(self.ee_pos, dtype=np.float64)

    @property
    def obj(self) -> np.ndarray:
        return np.asarray(self.obj_pos, dtype=np.float64)


class Action(BaseModel):
    """末端增量动作 + 夹爪指令（>=0 表示闭合）"""
    model_config = ConfigDict(frozen=True)

    delta: Vec3 = (0.0, 0.0, 0.0)
    gripper: float = -1.0

    @field_validator("delta")
    @classmethod
    def _finite_delta(cls, v: Vec3) -> Vec3:
        if not all(math.isfinite(c) for c in v):
            raise ValueError(f"动作分量必须有限: {v}")
        return v

    @field_validator("gripper")
    @classmethod
    def _finite_gripper(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("夹爪指令必须有限")
        return v

    def clipped(self) -> "Action":
        """裁剪到动作边界"""
        delta = np.clip(np.asarray(self.delta, dtype=np.float64), -DELTA_MAX, DELTA_MAX)
        return Action(delta=tuple(float(c) for c in delta), gripper=float(np.clip(self.gripper, -1.0, 1.0)))

    def to_array(self) -> np.ndarray:
        return np.array([*self.delta, self.gripper], dtype=np.float64)

    @classmethod
    def from_array(cls, values) -> "Action":
        values = np.asarray(values, dtype=np.float64).reshape(4)
        return cls(delta=(float(values[0]), float(values[1]), float(values[2])), gripper=float(values[3]))
