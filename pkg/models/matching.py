"""
帧匹配数据模型
"""
import math
from typing import Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

N_FUTURE_FRAMES = 7


class MatchConfig(BaseModel):
    """复合相似度权重、阈值与强制切换周期"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    w_geo: float = Field(default=0.35, ge=0.0)
    w_pos: float = Field(default=0.35, ge=0.0)
    w_ssim: float = Field(default=0.2, ge=0.0)
    w_flow: float = Field(default=0.1, ge=0.0)
    tau: float = Field(default=0.8, gt=0.0, le=1.0, description="匹配阈值")
    t_max: int = Field(default=28, ge=1, description="强制切换周期（跟踪器更新次数）")
    ssim_window: int = Field(default=7, ge=3)
    block_grid: int = Field(default=4, ge=1)
    edge_fraction: float = Field(default=0.2, gt=0.0, le=1.0)
    flow_block: int = Field(default=8, ge=1)
    flow_search: int = Field(default=4, ge=0)

    @model_validator(mode="after")
    def _check_weights(self) -> "MatchConfig":
        total = self.w_geo + self.w_pos + self.w_ssim + self.w_flow
        if not math.isclose(total, 1.0, abs_tol=1e-9):
            raise ValueError(f"相似度权重之和必须为 1，实际 {total}")
        if self.ssim_window % 2 == 0:
            raise ValueError("SSIM 窗口必须为奇数")
        return self

    @property
    def weights(self) -> Tuple[float, float, float, float]:
        return self.w_geo, self.w_pos, self.w_ssim, self.w_flow


class MatchScore(BaseModel):
    """复合相似度及其分量"""
    model_config = ConfigDict(frozen=True)

    total: float
    geo: float = Field(ge=0.0, le=1.0)
    pos: float = Field(ge=0.0, le=1.0)
    ssim: float = Field(ge=0.0, le=1.0)
    flow: float = Field(ge=0.0, le=1.0)

    @property
    def components(self) -> Tuple[float, float, float, float]:
        return self.geo, self.pos, self.ssim, self.flow


class GoalTracker(BaseModel):
    """目标帧跟踪器（值对象）"""
    model_config = ConfigDict(frozen=True)

    goal_index: int = Field(default=1, ge=1, le=N_FUTURE_FRAMES)
    steps_since_switch: int = Field(default=0, ge=0)


class TrackerUpdate(BaseModel):
    """一次跟踪器更新的结果"""
    model_config = ConfigDict(frozen=True)

    tracker: GoalTracker
    advanced: bool
    forced: bool = False
    score: MatchScore
