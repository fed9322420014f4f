"""
环境动力学、空间状态读取与成功判定
"""
import logging

import numpy as np

from models.env import CONTACT_RADIUS, GRASP_RADIUS, Action, EnvState, TaskId
from models.errors import EpisodeExhaustedError
from models.plan import SpatialState

logger = logging.getLogger(__name__)


def _to_vec(arr: np.ndarray):
    return tuple(float(c) for c in arr)


def step(state: EnvState, action: Action) -> EnvState:
    """执行一步动作，返回新状态"""
    if state.step_count >= state.task.max_steps:
        raise EpisodeExhaustedError(
            f"回合已达到最大步数 {state.task.max_steps}，不能继续执行"
        )

    action = action.clipped()
    closing = action.gripper >= 0.0

    ee = state.ee
    obj = state.obj
    new_ee = np.clip(ee + np.asarray(action.delta, dtype=np.float64), 0.0, 1.0)
    moved = new_ee - ee

    attached = state.attached
    if attached and closing:
        obj = np.clip(obj + moved, 0.0, 1.0)
    else:
        attached = False
        if state.task.task_id is TaskId.PUSH and np.linalg.norm(state.obj - ee) <= CONTACT_RADIUS:
            obj = np.clip(obj + moved, 0.0, 1.0)

    if closing and not attached and np.linalg.norm(obj - new_ee) <= GRASP_RADIUS:
        attached = True
        logger.debug(f"物体已被抓取, step={state.step_count + 1}")

    return EnvState(
        ee_pos=_to_vec(new_ee),
        obj_pos=_to_vec(obj),
        gripper_closed=closing,
        attached=attached,
        step_count=state.step_count + 1,
        task=state.task,
        rng_seed=state.rng_seed,
    )


def get_spatial_state(state: EnvState) -> SpatialState:
    """读取末端、物体位置及相对偏移"""
    return SpatialState.from_positions(state.ee_pos, state.obj_pos)


def check_success(state: EnvState) -> bool:
    """任务成功判定"""
    goal = np.asarray(state.task.goal_region.center, dtype=np.float64)
    radius = state.task.goal_region.radius
    if state.task.task_id is TaskId.REACH:
        return bool(np.linalg.norm(state.ee - goal) <= radius)
    in_goal = bool(np.linalg.norm(state.obj - goal) <= radius)
    if state.task.task_id is TaskId.PICK_PLACE:
        return in_goal and not state.attached
    return in_goal
