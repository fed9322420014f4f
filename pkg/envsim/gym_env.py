"""
Gymnasium 封装与停滞注入包装器
"""
import logging
from typing import Any, Dict, Optional

import gymnasium
import numpy as np

from envsim.dynamics import check_success, get_spatial_state, step
from envsim.renderer import render
from envsim.tasks import default_task, reset
from models.env import DEFAULT_RESOLUTION, DELTA_MAX, Action, EnvState, TaskSpec

logger = logging.getLogger(__name__)


class SyntheticManipulationEnv(gymnasium.Env):
    """合成操作环境（函数式内核的 Gymnasium 外壳）

    观测为渲染帧；info 中给出空间状态与成功标志。
    """

    metadata = {"render_modes": ["rgb_array"]}

    def __init__(self, task: Optional[TaskSpec] = None, resolution: int = DEFAULT_RESOLUTION,
                 render_mode: Optional[str] = "rgb_array"):
        super().__init__()
        self.task = task if task is not None else default_task("reach")
        self.resolution = int(resolution)
        self.render_mode = render_mode
        self.state: Optional[EnvState] = None
        self.action_space = gymnasium.spaces.Box(
            low=np.array([-DELTA_MAX] * 3 + [-1.0], dtype=np.float32),
            high=np.array([DELTA_MAX] * 3 + [1.0], dtype=np.float32),
            dtype=np.float32,
        )
        self.observation_space = gymnasium.spaces.Box(
            0.0, 1.0, shape=(self.resolution, self.resolution, 3), dtype=np.float32
        )

    def _info(self) -> Dict[str, Any]:
        return {
            "spatial_state": get_spatial_state(self.state),
            "success": check_success(self.state),
            "step_count": self.state.step_count,
            "attached": self.state.attached,
        }

    def reset(self, *, seed: Optional[int] = None, options: Optional[Dict[str, Any]] = None):
        super().reset(seed=seed)
        if options and options.get("task") is not None:
            self.task = options["task"]
        self.state = reset(self.task, 0 if seed is None else int(seed))
        return render(self.state, self.resolution), self._info()

    def step(self, action):
        if self.state is None:
            raise RuntimeError("环境尚未重置")
        if not isinstance(action, Action):
            action = Action.from_array(action)
        self.state = step(self.state, action)
        info = self._info()
        terminated = bool(info["success"])
        truncated = self.state.step_count >= self.task.max_steps and not terminated
        reward = 1.0 if terminated else 0.0
        return render(self.state, self.resolution), reward, terminated, truncated, info

    def render(self):
        if self.state is None:
            return None
        return render(self.state, self.resolution)


class FrozenEEWrapper(gymnasium.ActionWrapper):
    """在 [start, start + duration) 步内将末端增量置零，用于注入停滞"""

    def __init__(self, env: gymnasium.Env, start: int, duration: int):
        super().__init__(env)
        self.start = int(start)
        self.duration = int(duration)
        self.frozen_steps = 0

    def reset(self, **kwargs):
        self.frozen_steps = 0
        return self.env.reset(**kwargs)

    def action(self, action):
        step_count = self.env.unwrapped.state.step_count
        if self.start <= step_count < self.start + self.duration:
            self.frozen_steps += 1
            if isinstance(action, Action):
                return Action(delta=(0.0, 0.0, 0.0), gripper=action.gripper)
            frozen = np.array(action, dtype=np.float64, copy=True)
            frozen[:3] = 0.0
            return frozen
        return action
