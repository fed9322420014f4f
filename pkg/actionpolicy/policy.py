"""
扩散动作策略
"""
import logging
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F
from pydantic import BaseModel, ConfigDict, Field, model_validator

from actionpolicy.encoder import CoordEncoder, ObsEncoder
from actionpolicy.normalizer import ActionNormalizer
from actionpolicy.unet1d import ConditionalUnet1D
from config.run_config import RunConfig
from models.env import Action, TaskId
from models.errors import RangeError, ShapeError
from videodiff.model import frames_to_tensor
from videodiff.sampling import ddim_sample_loop
from videodiff.schedule import DiffusionSchedule, cosine_interpolated_schedule, q_sample

logger = logging.getLogger(__name__)

ACTION_DIM = 4


def cosine_beta_schedule(T: int = 100, beta_1: float = 1e-4, beta_T: float = 2e-2) -> DiffusionSchedule:
    """动作扩散使用的余弦插值 β 调度"""
    return cosine_interpolated_schedule(T, beta_1, beta_T)


def sample_goal_index(i: int, t_end: int, k: int = 20, rng: Optional[np.random.Generator] = None) -> int:
    """在 [i+1, min(i+K, T_end)] 内均匀采样目标帧下标"""
    if i >= t_end:
        raise RangeError(f"当前帧 {i} 必须小于末帧 {t_end}")
    if k < 1:
        raise RangeError(f"目标窗口 K 必须 ≥ 1，实际 {k}")
    rng = rng if rng is not None else np.random.default_rng()
    return int(rng.integers(i + 1, min(i + k, t_end) + 1))


def stack_observations(current: np.ndarray, goal: np.ndarray) -> np.ndarray:
    """当前帧与目标帧沿通道拼接为 (H, W, 6)"""
    if current.shape != goal.shape:
        raise ShapeError(f"当前帧 {current.shape} 与目标帧 {goal.shape} 形状不一致")
    return np.concatenate([current, goal], axis=-1)


class PolicyModelConfig(BaseModel):
    """策略网络结构配置"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    horizon: int = Field(default=4, ge=1)
    cond_dim: int = Field(default=64, ge=4)
    coord_with_object: bool = False
    encoder_channels: Tuple[int, ...] = (16, 32)
    down_dims: Tuple[int, ...] = (32, 64)
    time_dim: int = Field(default=32, ge=4)
    kernel_size: int = 3
    timesteps: int = Field(default=100, ge=2)
    beta_1: float = 1e-4
    beta_T: float = 2e-2
    p_drop: float = Field(default=0.1, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _check(self) -> "PolicyModelConfig":
        if not self.encoder_channels or not self.down_dims:
            raise ValueError("编码器与 U-Net 层数至少为 1")
        return self

    @property
    def coord_dim(self) -> int:
        return max(2, self.cond_dim // 4)

    @property
    def image_dim(self) -> int:
        return self.cond_dim - self.coord_dim

    @property
    def coord_in(self) -> int:
        return 6 if self.coord_with_object else 3

    @classmethod
    def from_run_config(cls, cfg: RunConfig) -> "PolicyModelConfig":
        p = cfg.policy
        return cls(horizon=p.horizon, cond_dim=p.cond_dim, coord_with_object=p.coord_with_object,
                   timesteps=p.timesteps, beta_1=p.beta_1, beta_T=p.beta_T, p_drop=p.p_drop)


class PolicySample(BaseModel):
    """一条策略训练样本；动作为环境单位，批处理时归一化"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    current: np.ndarray  # (H, W, 3)
    goal: np.ndarray  # (H, W, 3)
    p_ee: np.ndarray  # (3,)
    p_obj: np.ndarray  # (3,)
    actions: np.ndarray  # (horizon, 4)
    task_id: TaskId


class PolicyBatch(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    obs_stack: torch.Tensor  # (B, 6, H, W)
    coord: torch.Tensor  # (B, 3 | 6)
    actions: torch.Tensor  # (B, horizon, 4)，已归一化


class ActionSequence(BaseModel):
    """归一化动作序列 (H, 4)，每维位于 [−1, 1]"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    actions: np.ndarray

    @model_validator(mode="after")
    def _check(self) -> "ActionSequence":
        if self.actions.ndim != 2 or self.actions.shape[1] != ACTION_DIM:
            raise ValueError(f"动作序列形状应为 (H, {ACTION_DIM})，实际 {self.actions.shape}")
        if np.abs(self.actions).max(initial=0.0) > 1.0:
            raise ValueError("归一化动作超出 [−1, 1]")
        return self

    @property
    def horizon(self) -> int:
        return int(self.actions.shape[0])

    def to_actions(self, normalizer: ActionNormalizer) -> List[Action]:
        return [Action.from_array(row) for row in normalizer.denormalize(self.actions)]


class DiffusionPolicy(nn.Module):
    """ε_θ(a_t, t | c)，c = [图像特征; 坐标特征]"""

    def __init__(self, config: Optional[PolicyModelConfig] = None, normalizer: Optional[ActionNormalizer] = None):
        super().__init__()
        self.config = config or PolicyModelConfig()
        self.normalizer = normalizer or ActionNormalizer()
        self.obs_encoder = ObsEncoder(self.config.image_dim, self.config.encoder_channels)
        self.coord_encoder = CoordEncoder(self.config.coord_in, self.config.coord_dim)
        self.unet = ConditionalUnet1D(
            input_dim=ACTION_DIM,
            global_cond_dim=self.config.cond_dim,
            time_dim=self.config.time_dim,
            down_dims=self.config.down_dims,
            kernel_size=self.config.kernel_size,
        )
        self.null_condition = nn.Parameter(torch.randn(self.config.cond_dim) * 0.02)
        self.schedule = cosine_beta_schedule(self.config.timesteps, self.config.beta_1, self.config.beta_T)

    @property
    def device(self) -> torch.device:
        return self.null_condition.device

    def _coord(self, p_ee: np.ndarray, p_obj: Optional[np.ndarray]) -> np.ndarray:
        p_ee = np.asarray(p_ee, dtype=np.float32).reshape(3)
        if not np.all(np.isfinite(p_ee)):
            raise RangeError(f"末端坐标必须有限: {p_ee}")
        if not self.config.coord_with_object:
            return p_ee
        if p_obj is None:
            raise ShapeError("配置要求物体坐标，但未提供 p_obj")
        return np.concatenate([p_ee, np.asarray(p_obj, dtype=np.float32).reshape(3)])

    def encode(self, obs_stack: torch.Tensor, coord: torch.Tensor) -> torch.Tensor:
        return torch.cat([self.obs_encoder(obs_stack), self.coord_encoder(coord)], dim=-1)

    def encode_condition(self, current: np.ndarray, goal: np.ndarray, p_ee: np.ndarray,
                         p_obj: Optional[np.ndarray] = None) -> torch.Tensor:
        """单条输入 → 条件向量 c，长度 cond_dim"""
        stack_observations(current, goal)
        obs = frames_to_tensor(np.stack([current, goal])).reshape(1, 6, *current.shape[:2])
        obs = obs.to(device=self.device, dtype=self.null_condition.dtype)
        coord = torch.as_tensor(self._coord(p_ee, p_obj), device=self.device, dtype=self.null_condition.dtype)
        return self.encode(obs, coord[None])[0]

    def collate(self, samples: Sequence[PolicySample], device: Union[str, torch.device] = "cpu") -> PolicyBatch:
        if not samples:
            raise ValueError("空批次")
        h, w = samples[0].current.shape[:2]
        frames = np.stack([np.stack([s.current, s.goal]) for s in samples])  # (B, 2, H, W, 3)
        obs = frames_to_tensor(frames).reshape(len(samples), 6, h, w)
        coord = np.stack([self._coord(s.p_ee, s.p_obj) for s in samples])
        actions = np.stack([self.normalizer.normalize(s.actions) for s in samples])
        if actions.shape[1:] != (self.config.horizon, ACTION_DIM):
            raise ShapeError(f"动作标签形状应为 ({self.config.horizon}, {ACTION_DIM})，实际 {actions.shape[1:]}")
        return PolicyBatch(
            obs_stack=obs.to(device),
            coord=torch.as_tensor(coord, dtype=torch.float32, device=device),
            actions=torch.as_tensor(actions, dtype=torch.float32, device=device),
        )

    def denoise(self, a_t: torch.Tensor, t: torch.Tensor, cond: torch.Tensor,
                use_null: Union[bool, torch.Tensor] = False) -> torch.Tensor:
        if a_t.shape[-1] != ACTION_DIM:
            raise ShapeError(f"动作维度应为 {ACTION_DIM}，实际 {a_t.shape[-1]}")
        null = self.null_condition.expand_as(cond)
        if isinstance(use_null, bool):
            cond = null if use_null else cond
        else:
            cond = torch.where(use_null.to(cond.device).unsqueeze(-1), null, cond)
        return self.unet(a_t, t, cond)

    def draw_null_mask(self, batch_size: int, generator: Optional[torch.Generator] = None) -> torch.Tensor:
        return torch.rand(batch_size, generator=generator) < self.config.p_drop

    def training_loss(self, batch: PolicyBatch, generator: Optional[torch.Generator] = None,
                      t: Optional[torch.Tensor] = None, eps: Optional[torch.Tensor] = None,
                      drop_mask: Optional[torch.Tensor] = None) -> torch.Tensor:
        """去噪分数匹配：对专家动作加噪并回归噪声"""
        a0 = batch.actions
        b = a0.shape[0]
        if t is None:
            t = torch.randint(1, self.schedule.num_steps + 1, (b,), generator=generator)
        if eps is None:
            eps = torch.randn(a0.shape, generator=generator, dtype=a0.dtype)
        if drop_mask is None:
            drop_mask = self.draw_null_mask(b, generator)
        t, eps = t.to(a0.device), eps.to(a0.device)
        a_t = q_sample(a0, t, eps, self.schedule)
        cond = self.encode(batch.obs_stack, batch.coord)
        return F.mse_loss(self.denoise(a_t, t, cond, drop_mask), eps)

    @torch.no_grad()
    def sample(self, current: np.ndarray, goal: np.ndarray, p_ee: np.ndarray, p_obj: Optional[np.ndarray] = None,
               steps: int = 10, guidance_s: float = 1.0, seed: int = 0) -> ActionSequence:
        """DDIM 采样 H 步归一化动作"""
        cond = self.encode_condition(current, goal, p_ee, p_obj)[None]
        generator = torch.Generator().manual_seed(int(seed))

        def eps_fn(x: torch.Tensor, t: torch.Tensor, use_null: bool) -> torch.Tensor:
            return self.denoise(x, t, cond, use_null)

        out = ddim_sample_loop(eps_fn, (1, self.config.horizon, ACTION_DIM), self.schedule, steps, guidance_s,
                               generator, dtype=cond.dtype, device=self.device)
        return ActionSequence(actions=out[0].double().cpu().numpy())

    def act(self, current: np.ndarray, goal: np.ndarray, p_ee: np.ndarray, p_obj: Optional[np.ndarray] = None,
            steps: int = 10, guidance_s: float = 1.0, seed: int = 0) -> List[Action]:
        """采样并反归一化为环境动作"""
        return self.sample(current, goal, p_ee, p_obj, steps, guidance_s, seed).to_actions(self.normalizer)


def build_policy(cfg: RunConfig) -> DiffusionPolicy:
    return DiffusionPolicy(PolicyModelConfig.from_run_config(cfg))
