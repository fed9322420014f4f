"""
子目标条件视频扩散模型
"""
import logging
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F
from pydantic import BaseModel, ConfigDict, Field, model_validator

from conditioning.encoder import ConditionConfig, PlanTokens, SubplanEncoder, task_index, tokenize_plan
from config.run_config import RunConfig
from models.env import TaskId
from models.errors import ShapeError
from models.plan import N_MAX, PlanTable
from models.video import CLIP_LENGTH, VideoClip
from videodiff.sampling import ddim_sample_loop
from videodiff.schedule import linear_beta_schedule, q_sample
from videodiff.unet import FiLMUNet2D

logger = logging.getLogger(__name__)

N_FUTURE = CLIP_LENGTH - 1


class VideoModelConfig(BaseModel):
    """视频模型结构配置"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    resolution: int = Field(default=32, ge=8)
    embed_dim: int = Field(default=16, ge=4)
    n_max: int = Field(default=N_MAX, ge=1)
    base_channels: int = Field(default=16, ge=4)
    channel_mult: Tuple[int, int] = (1, 2)
    time_dim: int = Field(default=32, ge=4)
    timesteps: int = Field(default=1000, ge=2)
    beta_1: float = 1e-4
    beta_T: float = 0.02
    p_drop: float = Field(default=0.1, ge=0.0, le=1.0)
    use_subplan: bool = True

    @model_validator(mode="after")
    def _check_resolution(self) -> "VideoModelConfig":
        if self.resolution % 2:
            raise ValueError(f"分辨率必须为偶数，实际 {self.resolution}")
        return self

    @classmethod
    def from_run_config(cls, cfg: RunConfig) -> "VideoModelConfig":
        v = cfg.video
        return cls(
            resolution=cfg.env.resolution, embed_dim=v.embed_dim, n_max=v.n_max,
            base_channels=v.base_channels, timesteps=v.timesteps, beta_1=v.beta_1, beta_T=v.beta_T,
            p_drop=v.p_drop, use_subplan=v.use_subplan,
        )


class VideoSample(BaseModel):
    """一条视频训练样本：观测帧 + 7 个未来帧 + 规划"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    observation: np.ndarray  # (H, W, 3)
    future: np.ndarray  # (7, H, W, 3)
    tokens: PlanTokens
    task_id: TaskId
    plan_text: str = ""


class VideoBatch(BaseModel):
    """张量化批次，像素已缩放到 [−1, 1]"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    observation: torch.Tensor  # (B, 3, H, W)
    future: torch.Tensor  # (B, 21, H, W)
    action_idx: torch.Tensor
    direction_idx: torch.Tensor
    distance: torch.Tensor
    mask: torch.Tensor
    task_idx: torch.Tensor

    @property
    def size(self) -> int:
        return int(self.observation.shape[0])


def frames_to_tensor(frames: np.ndarray) -> torch.Tensor:
    """(..., H, W, 3) ∈ [0,1] → (..., 3, H, W) ∈ [−1,1]"""
    t = torch.as_tensor(np.ascontiguousarray(frames, dtype=np.float32))
    return t.movedim(-1, -3) * 2.0 - 1.0


def tensor_to_frames(x: torch.Tensor) -> np.ndarray:
    """(..., 3, H, W) ∈ [−1,1] → (..., H, W, 3) ∈ [0,1]"""
    return ((x.detach().float().cpu().movedim(-3, -1) + 1.0) / 2.0).clamp(0.0, 1.0).numpy()


def collate_video(samples: Sequence[VideoSample], device: Union[str, torch.device] = "cpu") -> VideoBatch:
    if not samples:
        raise ValueError("空批次")
    obs = frames_to_tensor(np.stack([s.observation for s in samples]))
    future = frames_to_tensor(np.stack([s.future for s in samples]))
    if future.shape[1] != N_FUTURE:
        raise ShapeError(f"未来帧数量应为 {N_FUTURE}，实际 {future.shape[1]}")
    b, _, c, h, w = future.shape
    return VideoBatch(
        observation=obs.to(device),
        future=future.reshape(b, N_FUTURE * c, h, w).to(device),
        action_idx=torch.as_tensor(np.stack([s.tokens.action_index for s in samples]), device=device),
        direction_idx=torch.as_tensor(np.stack([s.tokens.direction_index for s in samples]), device=device),
        distance=torch.as_tensor(np.stack([s.tokens.distance for s in samples]), device=device),
        mask=torch.as_tensor(np.stack([s.tokens.mask for s in samples]), device=device),
        task_idx=torch.as_tensor([task_index(s.task_id) for s in samples], device=device),
    )


class VideoDiffusionModel(nn.Module):
    """以 I_0 通道拼接、以 [z_task; e_1; …] 经 FiLM 调制的未来帧去噪网络"""

    def __init__(self, config: Optional[VideoModelConfig] = None):
        super().__init__()
        self.config = config or VideoModelConfig()
        cond_config = ConditionConfig(embed_dim=self.config.embed_dim, n_max=self.config.n_max)
        self.encoder = SubplanEncoder(cond_config)
        self.unet = FiLMUNet2D(
            in_channels=3 * (N_FUTURE + 1),
            out_channels=3 * N_FUTURE,
            cond_dim=cond_config.flat_dim,
            base_channels=self.config.base_channels,
            channel_mult=self.config.channel_mult,
            time_dim=self.config.time_dim,
        )
        self.null_condition = nn.Parameter(torch.randn(cond_config.flat_dim) * 0.02)
        self.schedule = linear_beta_schedule(self.config.timesteps, self.config.beta_1, self.config.beta_T)

    @property
    def device(self) -> torch.device:
        return self.null_condition.device

    def condition(self, batch: VideoBatch) -> torch.Tensor:
        """批次 → 展平全局条件；关闭子目标条件时仅保留任务 token"""
        mask = batch.mask if self.config.use_subplan else torch.zeros_like(batch.mask)
        return self.encoder(batch.action_idx, batch.direction_idx, batch.distance, mask, batch.task_idx)

    def denoise(self, x_t: torch.Tensor, t: torch.Tensor, observation: torch.Tensor, cond: torch.Tensor,
                use_null: Union[bool, torch.Tensor] = False) -> torch.Tensor:
        """预测噪声 ε̂(x_t, t | I_0, c)；use_null 为真（或逐样本掩码）时以空条件替换"""
        if x_t.shape[1] != 3 * N_FUTURE or x_t.shape[-2:] != observation.shape[-2:]:
            raise ShapeError(f"带噪视频形状 {tuple(x_t.shape)} 与观测 {tuple(observation.shape)} 不匹配")
        null = self.null_condition.expand_as(cond)
        if isinstance(use_null, bool):
            cond = null if use_null else cond
        else:
            cond = torch.where(use_null.to(cond.device).unsqueeze(-1), null, cond)
        return self.unet(torch.cat([x_t, observation], dim=1), t, cond)

    def draw_null_mask(self, batch_size: int, generator: Optional[torch.Generator] = None) -> torch.Tensor:
        """仅任务条件的基线不做条件丢弃"""
        if not self.config.use_subplan:
            return torch.zeros(batch_size, dtype=torch.bool)
        return torch.rand(batch_size, generator=generator) < self.config.p_drop

    def training_loss(self, batch: VideoBatch, generator: Optional[torch.Generator] = None,
                      t: Optional[torch.Tensor] = None, eps: Optional[torch.Tensor] = None,
                      drop_mask: Optional[torch.Tensor] = None) -> torch.Tensor:
        """ε 预测均方误差，t ~ U{1..T}，以概率 p_drop 丢弃条件"""
        x0 = batch.future
        b = x0.shape[0]
        if t is None:
            t = torch.randint(1, self.schedule.num_steps + 1, (b,), generator=generator)
        if eps is None:
            eps = torch.randn(x0.shape, generator=generator, dtype=x0.dtype)
        if drop_mask is None:
            drop_mask = self.draw_null_mask(b, generator)
        t, eps = t.to(x0.device), eps.to(x0.device)
        x_t = q_sample(x0, t, eps, self.schedule)
        pred = self.denoise(x_t, t, batch.observation, self.condition(batch), drop_mask)
        return F.mse_loss(pred, eps)

    @torch.no_grad()
    def sample(self, observation: np.ndarray, plan: Optional[PlanTable], task_id: Union[TaskId, str],
               steps: int = 50, guidance_s: float = 2.0, seed: int = 0) -> VideoClip:
        """DDIM 采样 7 个未来帧，返回以 I_0 开头的 8 帧片段"""
        height, width = observation.shape[:2]
        if height % 2 or width % 2:
            raise ShapeError(f"观测分辨率必须为偶数，实际 {observation.shape}")
        tokens = tokenize_plan(plan if self.config.use_subplan else None, self.config.n_max)
        cond = self.encoder.encode_tokens([tokens], [task_id], device=self.device)
        obs = frames_to_tensor(observation[None]).to(self.device)
        generator = torch.Generator().manual_seed(int(seed))
        if not self.config.use_subplan:
            # 基线只有条件分支
            guidance_s = 1.0

        def eps_fn(x: torch.Tensor, t: torch.Tensor, use_null: bool) -> torch.Tensor:
            return self.denoise(x, t, obs, cond, use_null)

        x0 = ddim_sample_loop(eps_fn, (1, 3 * N_FUTURE, height, width), self.schedule, steps, guidance_s,
                              generator, dtype=obs.dtype, device=self.device)
        future = tensor_to_frames(x0[0].reshape(N_FUTURE, 3, height, width))
        frames = np.concatenate([np.clip(observation, 0.0, 1.0)[None].astype(np.float32), future], axis=0)
        return VideoClip(frames=frames)


def build_video_model(cfg: RunConfig) -> VideoDiffusionModel:
    return VideoDiffusionModel(VideoModelConfig.from_run_config(cfg))

