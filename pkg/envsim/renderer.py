"""
确定性光栅渲染

通道约定: R = 末端（十字）, G = 物体（实心方块）, B = 目标（圆环）。
(x, y) 正交投影到像素坐标，+x 向左、+y 向上；z 编码为标记亮度。
"""
from typing import Tuple

import numpy as np

from models.env import DEFAULT_RESOLUTION, EnvState

EE_CHANNEL = 0
OBJECT_CHANNEL = 1
GOAL_CHANNEL = 2

BRIGHTNESS_FLOOR = 0.35


def brightness(z: float) -> float:
    """z → 标记亮度，位于 [0.35, 1]"""
    return float(BRIGHTNESS_FLOOR + (1.0 - BRIGHTNESS_FLOOR) * np.clip(z, 0.0, 1.0))


def world_to_pixel(x: float, y: float, height: int, width: int) -> Tuple[int, int]:
    """世界坐标 → (row, col)"""
    col = int(round((1.0 - x) * (width - 1)))
    row = int(round((1.0 - y) * (height - 1)))
    return row, col


def pixel_to_world(row: float, col: float, height: int, width: int) -> Tuple[float, float]:
    """(row, col) → 世界坐标 (x, y)"""
    return 1.0 - col / (width - 1), 1.0 - row / (height - 1)


def render(state: EnvState, resolution: int = DEFAULT_RESOLUTION) -> np.ndarray:
    """渲染一帧 (H, W, 3) float32"""
    height = width = int(resolution)
    frame = np.zeros((height, width, 3), dtype=np.float32)
    rows, cols = np.mgrid[0:height, 0:width]

    # 目标圆环
    goal = state.task.goal_region
    g_row, g_col = world_to_pixel(goal.center[0], goal.center[1], height, width)
    ring_radius = max(2.0, goal.radius * (width - 1))
    dist = np.hypot(rows - g_row, cols - g_col)
    frame[..., GOAL_CHANNEL][np.abs(dist - ring_radius) <= 0.5] = brightness(goal.center[2])

    # 物体方块
    o_row, o_col = world_to_pixel(state.obj_pos[0], state.obj_pos[1], height, width)
    half = max(1, width // 32)
    frame[
        max(0, o_row - half):o_row + half + 1,
        max(0, o_col - half):o_col + half + 1,
        OBJECT_CHANNEL,
    ] = brightness(state.obj_pos[2])

    # 末端十字
    e_row, e_col = world_to_pixel(state.ee_pos[0], state.ee_pos[1], height, width)
    arm = max(1, width // 16)
    value = brightness(state.ee_pos[2])
    frame[max(0, e_row - arm):e_row + arm + 1, e_col, EE_CHANNEL] = value
    frame[e_row, max(0, e_col - arm):e_col + arm + 1, EE_CHANNEL] = value

    return frame


def marker_mask(frame: np.ndarray, channel: int, level: float = 0.25) -> np.ndarray:
    """某一通道中亮度不低于 level 的像素"""
    return np.asarray(frame)[..., channel] >= level


def marker_centroid(frame: np.ndarray, channel: int, level: float = 0.25):
    """某一通道标记的像素质心 (row, col)，无标记时返回 None"""
    mask = marker_mask(frame, channel, level)
    if not mask.any():
        return None
    rows, cols = np.nonzero(mask)
    return float(rows.mean()), float(cols.mean())
