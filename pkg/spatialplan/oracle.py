"""
规则规划器：按坐标轴分解相对偏移
"""
import math
from typing import Dict, List, Sequence

import numpy as np

from models.env import TaskId
from models.errors import RangeError
from models.plan import ActionType, PlanTable, SpatialState, Subgoal

# 小于该阈值的轴向偏移不生成 move 子目标
EPS_AXIS = 0.005

TERMINAL_BY_TASK: Dict[TaskId, ActionType] = {
    TaskId.REACH: ActionType.PRESS,
    TaskId.PUSH: ActionType.PUSH,
    TaskId.PICK_PLACE: ActionType.GRASP,
}


def _finite_vector(values: Sequence[float], name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).reshape(-1)
    if arr.shape != (3,):
        raise RangeError(f"{name} 必须是三维向量，实际长度 {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise RangeError(f"{name} 含非有限分量: {list(arr)}")
    return arr


def compute_offset(p_ee: Sequence[float], p_obj: Sequence[float]) -> tuple:
    """相对偏移 Δp = p_obj − p_ee"""
    ee = _finite_vector(p_ee, "p_ee")
    obj = _finite_vector(p_obj, "p_obj")
    return tuple(float(c) for c in obj - ee)


def generate_plan(delta_p: Sequence[float], task_id) -> PlanTable:
    """按 x → y → z 顺序分解偏移，末尾追加任务的终止子目标"""
    task = TaskId.parse(task_id)
    delta = _finite_vector(delta_p, "delta_p")

    subgoals: List[Subgoal] = []
    for axis in range(3):
        magnitude = abs(float(delta[axis]))
        if magnitude > EPS_AXIS:
            direction = [0, 0, 0]
            direction[axis] = 1 if delta[axis] > 0 else -1
            subgoals.append(Subgoal(
                action_type=ActionType.MOVE,
                direction=tuple(direction),
                distance=round(magnitude, 2),
            ))
    subgoals.append(Subgoal(action_type=TERMINAL_BY_TASK[task]))
    return PlanTable(subgoals=tuple(subgoals))


def refine_plan(old: PlanTable, current: SpatialState, task_id) -> PlanTable:
    """重规划第一阶段：按当前偏移重新生成规划表（旧规划表不参与）"""
    return generate_plan(current.delta_p, task_id)


def soundness_bound() -> float:
    """精确执行 move 子目标后末端与物体的最大距离"""
    return math.sqrt(3.0) * (EPS_AXIS + 0.005)
