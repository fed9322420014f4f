"""
专家轨迹录制
"""
import logging
from typing import Iterable, List

import numpy as np

from envsim.dynamics import check_success, step
from envsim.expert import expert_action
from envsim.renderer import render
from envsim.tasks import reset
from models.env import DEFAULT_RESOLUTION, TaskSpec
from models.trajectory import TrajectoryRecord

logger = logging.getLogger(__name__)


def record_trajectory(task: TaskSpec, seed: int, resolution: int = DEFAULT_RESOLUTION) -> TrajectoryRecord:
    """执行脚本专家直到成功或步数耗尽，逐帧记录

    actions[i] 为状态 i 上执行的动作，末帧补零动作。
    """
    state = reset(task, seed)
    frames, ee, obj, actions = [render(state, resolution)], [state.ee], [state.obj], []
    success = check_success(state)
    while not success and state.step_count < state.task.max_steps:
        action = expert_action(state)
        actions.append(action.to_array())
        state = step(state, action)
        frames.append(render(state, resolution))
        ee.append(state.ee)
        obj.append(state.obj)
        success = check_success(state)
    actions.append(np.zeros(4))

    ee_arr = np.stack(ee).astype(np.float64)
    obj_arr = np.stack(obj).astype(np.float64)
    if not success:
        logger.warning(f"⚠️ 专家未完成任务 {task.task_id.value} (seed={seed})，记录标记为失败")
    return TrajectoryRecord(
        task_id=task.task_id,
        seed=seed,
        success=success,
        frames=np.stack(frames).astype(np.float32),
        ee_pos=ee_arr,
        obj_pos=obj_arr,
        distance=np.linalg.norm(obj_arr - ee_arr, axis=1),
        actions=np.stack(actions).astype(np.float64),
    )


def record_episodes(tasks: Iterable[TaskSpec], seeds: Iterable[int],
                    resolution: int = DEFAULT_RESOLUTION) -> List[TrajectoryRecord]:
    seeds = list(seeds)
    records = [record_trajectory(task, seed, resolution) for task in tasks for seed in seeds]
    n_ok = sum(r.success for r in records)
    logger.info(f"✅ 录制完成: {len(records)} 条轨迹, 成功 {n_ok} 条")
    return records
