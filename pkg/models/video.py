"""
视频片段数据模型
"""
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

CLIP_LENGTH = 8


class VideoClip(BaseModel):
    """观测帧 I_0 + 7 个未来帧，(8, H, W, 3)，取值 [0, 1]"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    frames: np.ndarray

    @model_validator(mode="after")
    def _check_frames(self) -> "VideoClip":
        f = self.frames
        if f.ndim != 4 or f.shape[0] != CLIP_LENGTH or f.shape[-1] != 3:
            raise ValueError(f"视频片段形状应为 ({CLIP_LENGTH}, H, W, 3)，实际 {f.shape}")
        if f.size and (f.min() < 0.0 or f.max() > 1.0):
            raise ValueError("视频帧取值必须位于 [0, 1]")
        return self

    @property
    def observation(self) -> np.ndarray:
        return self.frames[0]

    @property
    def future(self) -> np.ndarray:
        return self.frames[1:]

    def frame(self, index: int) -> np.ndarray:
        return self.frames[index]

    @property
    def resolution(self) -> Tuple[int, int]:
        return int(self.frames.shape[1]), int(self.frames.shape[2])
