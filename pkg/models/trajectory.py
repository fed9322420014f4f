"""
轨迹记录与分段参数数据模型
"""
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from models.env import TaskId


class SegmentationParams(BaseModel):
    """精细操作区间检测与重采样参数"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    interval: int = Field(default=5, ge=1, description="粗采样步长")
    distance_threshold: float = Field(default=0.05, gt=0.0)
    consecutive_frames: int = Field(default=3, ge=1)
    recovery_needed_frames: int = Field(default=2, ge=0)
    suppress_single_spike: bool = True
    max_allowed_anomaly: int = Field(default=1, ge=0)

    @property
    def fine_stride(self) -> int:
        """精细区间内的步长（5 倍密度）"""
        return max(1, round(self.interval / 5))


class TrajectoryRecord(BaseModel):
    """专家轨迹：逐帧图像、位置、距离与动作

    actions[i] 为在状态 i 上执行的动作；最后一个状态没有后续动作，记为零动作。
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    task_id: TaskId
    seed: int
    success: bool
    frames: np.ndarray  # (L, H, W, 3) float32
    ee_pos: np.ndarray  # (L, 3) float64
    obj_pos: np.ndarray  # (L, 3) float64
    distance: np.ndarray  # (L,) float64
    actions: np.ndarray  # (L, 4) float64

    @model_validator(mode="after")
    def _check_lengths(self) -> "TrajectoryRecord":
        n = len(self.frames)
        if self.frames.ndim != 4 or self.frames.shape[-1] != 3:
            raise ValueError(f"frames 形状应为 (L,H,W,3)，实际 {self.frames.shape}")
        for name, arr, width in (("ee_pos", self.ee_pos, 3), ("obj_pos", self.obj_pos, 3), ("actions", self.actions, 4)):
            if arr.shape != (n, width):
                raise ValueError(f"{name} 形状应为 ({n},{width})，实际 {arr.shape}")
        if self.distance.shape != (n,):
            raise ValueError(f"distance 形状应为 ({n},)，实际 {self.distance.shape}")
        return self

    @property
    def length(self) -> int:
        return int(len(self.frames))

    @property
    def resolution(self) -> Tuple[int, int]:
        return int(self.frames.shape[1]), int(self.frames.shape[2])

    def same_as(self, other: "TrajectoryRecord") -> bool:
        """逐位比较"""
        return (
            self.task_id == other.task_id
            and self.seed == other.seed
            and self.success == other.success
            and all(
                a.dtype == b.dtype and np.array_equal(a, b)
                for a, b in (
                    (self.frames, other.frames),
                    (self.ee_pos, other.ee_pos),
                    (self.obj_pos, other.obj_pos),
                    (self.distance, other.distance),
                    (self.actions, other.actions),
                )
            )
        )


class ManifestEntry(BaseModel):
    """数据集清单条目"""
    path: str
    task_id: TaskId
    seed: int
    length: int
    success: bool
    fine_intervals: List[Tuple[int, int]]
    resampled_indices: List[int]
    sha256: str


class DatasetManifest(BaseModel):
    """数据集清单"""
    config_hash: str
    resolution: int
    tasks: List[TaskId]
    segmentation: SegmentationParams
    entries: List[ManifestEntry]
