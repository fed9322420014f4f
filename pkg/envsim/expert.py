"""
脚本专家（比例控制器），用于生成成功示范轨迹
"""
import numpy as np

from models.env import DELTA_MAX, GRASP_RADIUS, CONTACT_RADIUS, Action, EnvState, TaskId

OPEN = -1.0
CLOSE = 1.0


def _toward(target: np.ndarray, source: np.ndarray, gain: float = 1.0) -> np.ndarray:
    return np.clip(gain * (target - source), -DELTA_MAX, DELTA_MAX)


def _action(delta: np.ndarray, gripper: float) -> Action:
    return Action(delta=tuple(float(c) for c in delta), gripper=gripper)


def expert_action(state: EnvState) -> Action:
    """专家动作：先移向物体，接触/抓取后再移向目标"""
    ee, obj = state.ee, state.obj
    goal = np.asarray(state.task.goal_region.center, dtype=np.float64)
    task_id = state.task.task_id

    if task_id is TaskId.REACH:
        return _action(_toward(goal, ee), OPEN)

    if task_id is TaskId.PUSH:
        if np.linalg.norm(obj - ee) <= CONTACT_RADIUS:
            return _action(_toward(goal, obj), OPEN)
        return _action(_toward(obj, ee), OPEN)

    # pick_place
    release_radius = 0.5 * state.task.goal_region.radius
    if np.linalg.norm(obj - goal) <= release_radius:
        return _action(np.zeros(3), OPEN)
    if state.attached:
        return _action(_toward(goal, obj), CLOSE)
    if np.linalg.norm(obj - ee) <= GRASP_RADIUS:
        return _action(_toward(obj, ee), CLOSE)
    return _action(_toward(obj, ee), OPEN)
