"""
子目标与任务编码：组合全局条件 [z_task; e_1; …; e_n]
"""
import logging
from typing import List, Optional, Sequence

import numpy as np
import torch
import torch.nn as nn
from pydantic import BaseModel, ConfigDict, Field

from models.env import TaskId
from models.errors import CapacityError, RangeError, ShapeError, VocabularyError
from models.plan import ACTION_VOCABULARY, N_MAX, ActionType, PlanTable, Subgoal

logger = logging.getLogger(__name__)

TASK_VOCABULARY: List[TaskId] = list(TaskId)


class ConditionConfig(BaseModel):
    """条件编码配置"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    embed_dim: int = Field(default=16, ge=4)
    n_action_types: int = Field(default=len(ACTION_VOCABULARY), ge=1)
    n_direction_bins: int = 27
    n_max: int = Field(default=N_MAX, ge=1)
    n_tasks: int = Field(default=len(TASK_VOCABULARY), ge=1)

    @property
    def flat_dim(self) -> int:
        return (1 + self.n_max) * self.embed_dim


class PlanTokens(BaseModel):
    """规划表的离散化表示（定长 N_max，mask 标记真实子目标）"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    action_index: np.ndarray  # (N_max,) int64
    direction_index: np.ndarray  # (N_max,) int64
    distance: np.ndarray  # (N_max,) float32
    mask: np.ndarray  # (N_max,) bool

    @property
    def count(self) -> int:
        return int(self.mask.sum())


class GlobalCondition(BaseModel):
    """全局条件：任务 token + 填充后的子目标 token"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    tokens: torch.Tensor  # (1 + N_max, d)
    mask: torch.Tensor  # (1 + N_max,) bool

    def flatten(self, null_token: torch.Tensor) -> torch.Tensor:
        """按 mask 将填充位替换为空 token 后展平为 (1 + N_max)·d"""
        return torch.where(self.mask[:, None], self.tokens, null_token.expand_as(self.tokens)).reshape(-1)


def discretize_direction(v: Sequence[int]) -> int:
    """符号方向 → [0, 27) 编号"""
    v = tuple(v)
    if len(v) != 3 or any(c not in (-1, 0, 1) for c in v):
        raise RangeError(f"方向分量必须属于 {{-1,0,1}}: {v}")
    return int((v[0] + 1) * 9 + (v[1] + 1) * 3 + (v[2] + 1))


def action_index(t) -> int:
    try:
        return ActionType(t.value if isinstance(t, ActionType) else str(t)).index
    except ValueError:
        raise VocabularyError(f"未知动作类型: {t!r}") from None


def task_index(task_id) -> int:
    try:
        return TASK_VOCABULARY.index(TaskId(task_id.value if isinstance(task_id, TaskId) else str(task_id)))
    except ValueError:
        raise VocabularyError(f"未知任务: {task_id!r}") from None


def tokenize_plan(plan: Optional[PlanTable], n_max: int = N_MAX) -> PlanTokens:
    """规划表离散化；plan 为空时全部为填充位"""
    subgoals = plan.subgoals if plan is not None else ()
    if len(subgoals) > n_max:
        raise CapacityError(f"子目标数量 {len(subgoals)} 超过上限 {n_max}")
    action_idx = np.zeros(n_max, dtype=np.int64)
    direction_idx = np.full(n_max, 13, dtype=np.int64)
    distance = np.zeros(n_max, dtype=np.float32)
    mask = np.zeros(n_max, dtype=bool)
    for i, g in enumerate(subgoals):
        action_idx[i] = g.action_type.index
        direction_idx[i] = discretize_direction(g.direction)
        distance[i] = g.distance
        mask[i] = True
    return PlanTokens(action_index=action_idx, direction_index=direction_idx, distance=distance, mask=mask)


class SubplanEncoder(nn.Module):
    """子目标编码器

    e_act 查表，e_dir 按 27 个符号模式查表，e_dis 由两层 MLP 给出；
    三者拼接后经 MLP 得到子目标嵌入。任务嵌入查表，填充位使用可学习空 token。
    """

    def __init__(self, config: Optional[ConditionConfig] = None):
        super().__init__()
        self.config = config or ConditionConfig()
        d = self.config.embed_dim
        self.action_table = nn.Embedding(self.config.n_action_types, d)
        self.direction_table = nn.Embedding(self.config.n_direction_bins, d)
        self.distance_mlp = nn.Sequential(nn.Linear(1, d), nn.SiLU(), nn.Linear(d, d))
        self.subgoal_mlp = nn.Sequential(nn.Linear(3 * d, d), nn.SiLU(), nn.Linear(d, d))
        self.task_table = nn.Embedding(self.config.n_tasks, d)
        self.null_token = nn.Parameter(torch.randn(d) * 0.02)

    @property
    def embed_dim(self) -> int:
        return self.config.embed_dim

    @property
    def flat_dim(self) -> int:
        return self.config.flat_dim

    def _device(self) -> torch.device:
        return self.null_token.device

    def embed_action_type(self, t) -> torch.Tensor:
        """动作类型嵌入 (d,)"""
        idx = torch.tensor([action_index(t)], device=self._device())
        return self.action_table(idx)[0]

    def embed_direction(self, v: Sequence[int]) -> torch.Tensor:
        idx = torch.tensor([discretize_direction(v)], device=self._device())
        return self.direction_table(idx)[0]

    def embed_distance(self, s) -> torch.Tensor:
        """距离嵌入 (d,)"""
        s = torch.as_tensor(s, dtype=self.null_token.dtype, device=self._device()).reshape(-1)
        if s.numel() != 1:
            raise ShapeError("距离必须是标量")
        if not torch.isfinite(s).all() or (s < 0).any():
            raise RangeError(f"距离必须为非负有限数: {s.item()}")
        return self.distance_mlp(s.reshape(1, 1))[0]

    def embed_subgoal(self, g: Subgoal) -> torch.Tensor:
        """子目标嵌入 MLP([e_act; e_dir; e_dis]) (d,)"""
        parts = [
            self.embed_action_type(g.action_type),
            self.embed_direction(g.direction),
            self.embed_distance(g.distance),
        ]
        return self.subgoal_mlp(torch.cat(parts, dim=-1))

    def embed_task(self, task_id) -> torch.Tensor:
        """任务嵌入 (d,)"""
        idx = torch.tensor([task_index(task_id)], device=self._device())
        return self.task_table(idx)[0]

    def build_global_condition(self, z_task: torch.Tensor, subgoal_embeds: Sequence[torch.Tensor]) -> GlobalCondition:
        """[z_task, e_1..e_n, null, …] 填充到 N_max 个子目标位"""
        n, n_max, d = len(subgoal_embeds), self.config.n_max, self.embed_dim
        if n > n_max:
            raise CapacityError(f"子目标数量 {n} 超过上限 {n_max}")
        if z_task.shape != (d,) or any(e.shape != (d,) for e in subgoal_embeds):
            raise ShapeError(f"嵌入长度必须为 {d}")
        tokens = [z_task, *subgoal_embeds] + [self.null_token] * (n_max - n)
        mask = torch.zeros(1 + n_max, dtype=torch.bool, device=z_task.device)
        mask[: 1 + n] = True
        return GlobalCondition(tokens=torch.stack(tokens), mask=mask)

    def encode_plan(self, plan: Optional[PlanTable], task_id) -> GlobalCondition:
        """规划表 + 任务 → 全局条件"""
        subgoals = plan.subgoals if plan is not None else ()
        return self.build_global_condition(self.embed_task(task_id), [self.embed_subgoal(g) for g in subgoals])

    def flatten(self, cond: GlobalCondition) -> torch.Tensor:
        return cond.flatten(self.null_token)

    def forward(self, action_idx: torch.Tensor, direction_idx: torch.Tensor, distance: torch.Tensor,
                mask: torch.Tensor, task_idx: torch.Tensor) -> torch.Tensor:
        """批量编码，返回展平条件 (B, (1 + N_max)·d)"""
        batch, n_max = action_idx.shape
        if n_max != self.config.n_max:
            raise ShapeError(f"子目标位数应为 {self.config.n_max}，实际 {n_max}")
        d = self.embed_dim
        e_act = self.action_table(action_idx)
        e_dir = self.direction_table(direction_idx)
        e_dis = self.distance_mlp(distance.to(self.null_token.dtype).unsqueeze(-1))
        subgoals = self.subgoal_mlp(torch.cat([e_act, e_dir, e_dis], dim=-1))
        subgoals = torch.where(mask.unsqueeze(-1), subgoals, self.null_token.expand(batch, n_max, d))
        z_task = self.task_table(task_idx).unsqueeze(1)
        return torch.cat([z_task, subgoals], dim=1).reshape(batch, -1)

    def encode_tokens(self, tokens: Sequence[PlanTokens], tasks: Sequence, device=None) -> torch.Tensor:
        """PlanTokens 列表 → 展平条件"""
        device = device or self._device()
        return self(
            torch.as_tensor(np.stack([t.action_index for t in tokens]), device=device),
            torch.as_tensor(np.stack([t.direction_index for t in tokens]), device=device),
            torch.as_tensor(np.stack([t.distance for t in tokens]), device=device),
            torch.as_tensor(np.stack([t.mask for t in tokens]), device=device),
            torch.as_tensor([task_index(t) for t in tasks], device=device),
        )
