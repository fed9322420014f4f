"""
任务定义与环境重置
"""
import json
import logging
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np

from models.env import DEFAULT_GOAL_RADIUS, EnvState, GoalRegion, TaskId, TaskSpec, Vec3
from models.errors import ConfigurationError

logger = logging.getLogger(__name__)

# 物体初始位置抖动的欧氏范数上界
JITTER_MAX = 0.05

# 各任务末端初始位置
EE_STARTS: Dict[TaskId, Vec3] = {
    TaskId.REACH: (0.2, 0.5, 0.5),
    TaskId.PUSH: (0.2, 0.3, 0.5),
    TaskId.PICK_PLACE: (0.3, 0.3, 0.7),
}

DEFAULT_TASKS: Dict[TaskId, TaskSpec] = {
    TaskId.REACH: TaskSpec(
        task_id=TaskId.REACH,
        object_start=(0.7, 0.5, 0.4),
        goal_region=GoalRegion(center=(0.7, 0.5, 0.4), radius=DEFAULT_GOAL_RADIUS),
    ),
    TaskId.PUSH: TaskSpec(
        task_id=TaskId.PUSH,
        object_start=(0.4, 0.5, 0.5),
        goal_region=GoalRegion(center=(0.7, 0.5, 0.5), radius=DEFAULT_GOAL_RADIUS),
    ),
    TaskId.PICK_PLACE: TaskSpec(
        task_id=TaskId.PICK_PLACE,
        object_start=(0.5, 0.4, 0.3),
        goal_region=GoalRegion(center=(0.7, 0.7, 0.6), radius=DEFAULT_GOAL_RADIUS),
    ),
}


def default_task(task_id) -> TaskSpec:
    """获取内置任务定义"""
    return DEFAULT_TASKS[TaskId.parse(task_id)]


def load_tasks(path: Union[str, Path]) -> Tuple[List[TaskSpec], int]:
    """从 JSON 文件加载任务定义

    文件格式: {"resolution": 32, "tasks": [{task_id, object_start, goal_region, max_steps}, ...]}
    """
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"无法读取任务文件 {path}: {e}") from e
    try:
        tasks = [TaskSpec.model_validate(item) for item in raw.get("tasks", [])]
    except ValueError as e:
        raise ConfigurationError(f"任务定义不合法: {e}") from e
    resolution = int(raw.get("resolution", 32))
    if resolution < 8:
        raise ConfigurationError(f"分辨率过小: {resolution}")
    logger.info(f"✅ 已加载 {len(tasks)} 个任务定义, 分辨率 {resolution}")
    return tasks, resolution


def reset(task: TaskSpec, seed: int) -> EnvState:
    """按任务与种子重置环境

    物体位置在 object_start 附近做有界抖动（范数不超过 JITTER_MAX）。
    到达任务的目标中心随物体一起移动。
    """
    if not isinstance(task, TaskSpec):
        raise ConfigurationError(f"任务定义类型错误: {type(task).__name__}")
    task_id = TaskId.parse(task.task_id)

    rng = np.random.default_rng(seed)
    bound = JITTER_MAX / np.sqrt(3.0)
    jitter = rng.uniform(-bound, bound, size=3)
    obj = np.clip(np.asarray(task.object_start, dtype=np.float64) + jitter, 0.0, 1.0)
    obj_pos = tuple(float(c) for c in obj)

    if task_id is TaskId.REACH:
        task = task.model_copy(
            update={"goal_region": GoalRegion(center=obj_pos, radius=task.goal_region.radius)}
        )

    ee_pos = task.ee_start if task.ee_start is not None else EE_STARTS[task_id]
    return EnvState(
        ee_pos=tuple(float(c) for c in ee_pos),
        obj_pos=obj_pos,
        gripper_closed=False,
        attached=False,
        step_count=0,
        task=task,
        rng_seed=int(seed),
    )
