"""
扩散噪声调度与前向加噪
"""
from typing import Union

import numpy as np
import torch

from models.errors import ConfigurationError, RangeError, ShapeError


class DiffusionSchedule:
    """噪声调度（时间步从 1 开始编号，alpha_bar(0) = 1）"""

    def __init__(self, betas: np.ndarray, kind: str = "custom"):
        betas = np.asarray(betas, dtype=np.float64)
        if betas.ndim != 1 or betas.size < 2:
            raise ConfigurationError("β 序列长度至少为 2")
        if not np.all((betas > 0) & (betas < 1)):
            raise ConfigurationError("β 必须位于 (0, 1)")
        self.kind = kind
        self.betas = betas
        self.alphas = 1.0 - betas
        self.alpha_bars = np.cumprod(self.alphas)
        # 索引 0 对应 t = 0
        self._alpha_bars_padded = torch.from_numpy(np.concatenate([[1.0], self.alpha_bars]))

    @property
    def num_steps(self) -> int:
        return int(self.betas.size)

    def beta(self, t: int) -> float:
        return float(self.betas[t - 1])

    def alpha_bar(self, t: int) -> float:
        if not 0 <= t <= self.num_steps:
            raise RangeError(f"时间步 {t} 超出 [0, {self.num_steps}]")
        return float(self._alpha_bars_padded[t])

    def alpha_bar_at(self, t: torch.Tensor, like: torch.Tensor) -> torch.Tensor:
        """按批量时间步取 alpha_bar，并广播到 like 的维度"""
        values = self._alpha_bars_padded.to(device=like.device)[t.long().to(like.device)].to(like.dtype)
        return values.reshape(-1, *([1] * (like.dim() - 1)))

    def ddim_timesteps(self, steps: int) -> list:
        """从 T 到 1 均匀抽取的递减时间步"""
        if not 1 <= steps <= self.num_steps:
            raise ConfigurationError(f"采样步数必须位于 [1, {self.num_steps}]，实际 {steps}")
        ts = np.round(np.linspace(self.num_steps, 1, steps)).astype(np.int64)
        return sorted(set(int(t) for t in ts), reverse=True)


def _interpolated(T: int, beta_1: float, beta_T: float, weights: np.ndarray, kind: str) -> DiffusionSchedule:
    if T < 2:
        raise ConfigurationError(f"扩散步数必须 ≥ 2，实际 {T}")
    if not (0.0 < beta_1 <= beta_T < 1.0):
        raise ConfigurationError(f"β 端点必须满足 0 < beta_1 ≤ beta_T < 1，实际 ({beta_1}, {beta_T})")
    # 端点处权重为 0 / 1，两端取值精确
    betas = (1.0 - weights) * beta_1 + weights * beta_T
    return DiffusionSchedule(betas, kind=kind)


def linear_beta_schedule(T: int = 1000, beta_1: float = 1e-4, beta_T: float = 0.02) -> DiffusionSchedule:
    """线性调度 β_t = beta_1 + (t−1)/(T−1)·(beta_T − beta_1)"""
    w = np.arange(T, dtype=np.float64) / (T - 1) if T >= 2 else np.zeros(1)
    return _interpolated(T, beta_1, beta_T, w, "linear")


def cosine_interpolated_schedule(T: int = 100, beta_1: float = 1e-4, beta_T: float = 2e-2) -> DiffusionSchedule:
    """余弦插值调度 β_t = beta_1 + (beta_T − beta_1)·(1 − cos(π(t−1)/(T−1)))/2"""
    if T >= 2:
        w = (1.0 - np.cos(np.pi * np.arange(T, dtype=np.float64) / (T - 1))) / 2.0
        w[0], w[-1] = 0.0, 1.0
    else:
        w = np.zeros(1)
    return _interpolated(T, beta_1, beta_T, w, "cosine")


def q_sample(x0: torch.Tensor, t: Union[int, torch.Tensor], eps: torch.Tensor, sched: DiffusionSchedule) -> torch.Tensor:
    """前向加噪 √ᾱ_t·x0 + √(1−ᾱ_t)·eps"""
    if x0.shape != eps.shape:
        raise ShapeError(f"x0 与噪声形状不一致: {tuple(x0.shape)} vs {tuple(eps.shape)}")
    if not torch.is_tensor(t):
        t = torch.full((x0.shape[0],), int(t), dtype=torch.long)
    if t.dim() == 0:
        t = t.expand(x0.shape[0])
    if (t < 1).any() or (t > sched.num_steps).any():
        raise RangeError(f"时间步必须位于 [1, {sched.num_steps}]")
    ab = sched.alpha_bar_at(t, x0)
    return ab.sqrt() * x0 + (1.0 - ab).sqrt() * eps
