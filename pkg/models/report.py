"""
回合事件与评估报告数据模型
"""
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from models.env import TaskId


class EventKind(str, Enum):
    """回合事件类型"""
    PLAN_ISSUED = "plan_issued"  # 规划表下发
    GENERATION_ATTEMPT = "generation_attempt"  # 视频生成尝试
    VALIDATION_VERDICT = "validation_verdict"  # 视频校验结论
    ENCODE_COORD = "encode_coord"  # 坐标编码
    ACTIONS_SAMPLED = "actions_sampled"  # 动作序列采样
    GOAL_ADVANCE = "goal_advance"  # 目标帧推进
    STUCK = "stuck"  # 停滞检测
    REPLAN = "replan"  # 两阶段重规划
    SUCCESS = "success"  # 任务成功
    EPISODE_END = "episode_end"  # 回合结束


class EpisodeEvent(BaseModel):
    """结构化事件（不含墙钟时间）"""
    seq: int
    step: int
    kind: EventKind
    payload: Dict[str, Any] = Field(default_factory=dict)


class EpisodeReport(BaseModel):
    """单回合报告"""
    task_id: TaskId
    seed: int
    success: bool
    steps: int = Field(ge=0)
    replans: int = Field(default=0, ge=0)
    regenerations: int = Field(default=0, ge=0, description="首次之外的额外生成次数")
    generation_attempts: int = Field(default=0, ge=0)
    flagged_generations: int = Field(default=0, ge=0, description="超过 R_max 后降级返回的次数")
    match_scores: List[float] = Field(default_factory=list)
    final_plan_text: str = ""
    mask_ratio: float = 0.0
    events: List[EpisodeEvent] = Field(default_factory=list)

    def count(self, kind: EventKind) -> int:
        return sum(1 for e in self.events if e.kind == kind)

    def to_jsonl(self) -> str:
        """事件日志，一行一个 JSON 对象"""
        return "".join(e.model_dump_json() + "\n" for e in self.events)


class TaskMetrics(BaseModel):
    """单任务聚合指标"""
    task_id: TaskId
    episodes: int
    success_rate: float = Field(ge=0.0, le=1.0)
    mean_steps: float
    mean_replans: float
    mean_regenerations: float


class MetricsReport(BaseModel):
    """评估报告"""
    config_hash: str
    n_episodes: int
    per_task: List[TaskMetrics]
    loss_curves: Dict[str, List[float]] = Field(default_factory=dict)
    wall_clock_seconds: Optional[float] = None

    @property
    def overall_success_rate(self) -> float:
        if self.n_episodes == 0:
            return 0.0
        return sum(t.success_rate * t.episodes for t in self.per_task) / self.n_episodes
