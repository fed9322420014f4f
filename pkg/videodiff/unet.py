"""
条件归一化（FiLM）二维 U-Net
"""
import math
from typing import Sequence

import torch
import torch.nn as nn


class SinusoidalPosEmb(nn.Module):
    def __init__(self, dim: int):
        super().__init__()
        self.dim = dim

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        half_dim = self.dim // 2
        emb = math.log(10000) / max(half_dim - 1, 1)
        emb = torch.exp(torch.arange(half_dim, device=x.device, dtype=x.dtype) * -emb)
        emb = x[:, None] * emb[None, :]
        return torch.cat((emb.sin(), emb.cos()), dim=-1)


def group_count(channels: int, max_groups: int = 8) -> int:
    return math.gcd(max_groups, channels)


class FiLM(nn.Module):
    """由条件向量预测逐通道缩放 / 平移: (1 + scale)·h + shift"""

    def __init__(self, cond_dim: int, channels: int):
        super().__init__()
        self.channels = channels
        self.project = nn.Sequential(nn.Mish(), nn.Linear(cond_dim, 2 * channels))

    def forward(self, h: torch.Tensor, cond: torch.Tensor) -> torch.Tensor:
        scale, shift = self.project(cond).chunk(2, dim=-1)
        shape = (h.shape[0], self.channels) + (1,) * (h.dim() - 2)
        return (1 + scale.reshape(shape)) * h + shift.reshape(shape)


class ConditionalResBlock2D(nn.Module):
    """conv → GroupNorm(无仿射) → FiLM → Mish → conv → GroupNorm → Mish，加残差"""

    def __init__(self, in_channels: int, out_channels: int, cond_dim: int):
        super().__init__()
        self.conv1 = nn.Conv2d(in_channels, out_channels, 3, padding=1)
        self.norm1 = nn.GroupNorm(group_count(out_channels), out_channels, affine=False)
        self.film = FiLM(cond_dim, out_channels)
        self.conv2 = nn.Conv2d(out_channels, out_channels, 3, padding=1)
        self.norm2 = nn.GroupNorm(group_count(out_channels), out_channels)
        self.act = nn.Mish()
        self.residual = nn.Conv2d(in_channels, out_channels, 1) if in_channels != out_channels else nn.Identity()

    def forward(self, x: torch.Tensor, cond: torch.Tensor) -> torch.Tensor:
        h = self.act(self.film(self.norm1(self.conv1(x)), cond))
        h = self.act(self.norm2(self.conv2(h)))
        return h + self.residual(x)


class FiLMUNet2D(nn.Module):
    """两级编码-解码 U-Net；时间嵌入与全局条件拼接后驱动每个残差块的 FiLM"""

    def __init__(self, in_channels: int, out_channels: int, cond_dim: int,
                 base_channels: int = 16, channel_mult: Sequence[int] = (1, 2), time_dim: int = 32):
        super().__init__()
        c1 = base_channels * channel_mult[0]
        c2 = base_channels * channel_mult[1]
        self.time_encoder = nn.Sequential(
            SinusoidalPosEmb(time_dim),
            nn.Linear(time_dim, time_dim * 2),
            nn.Mish(),
            nn.Linear(time_dim * 2, time_dim),
        )
        film_dim = time_dim + cond_dim
        self.down1 = ConditionalResBlock2D(in_channels, c1, film_dim)
        self.downsample = nn.Conv2d(c1, c1, 3, stride=2, padding=1)
        self.down2 = ConditionalResBlock2D(c1, c2, film_dim)
        self.mid = ConditionalResBlock2D(c2, c2, film_dim)
        self.upsample = nn.ConvTranspose2d(c2, c2, 4, stride=2, padding=1)
        self.up1 = ConditionalResBlock2D(c2 + c1, c1, film_dim)
        self.out = nn.Conv2d(c1, out_channels, 1)

    def forward(self, x: torch.Tensor, timesteps: torch.Tensor, cond: torch.Tensor) -> torch.Tensor:
        t_emb = self.time_encoder(timesteps.to(x.dtype))
        film_cond = torch.cat([t_emb, cond], dim=-1)
        skip = self.down1(x, film_cond)
        h = self.down2(self.downsample(skip), film_cond)
        h = self.mid(h, film_cond)
        h = self.upsample(h)
        h = self.up1(torch.cat([h, skip], dim=1), film_cond)
        return self.out(h)
