"""
策略条件编码：6 通道图像堆叠 + 末端坐标
"""
from typing import Sequence

import torch
import torch.nn as nn

from models.errors import ShapeError
from videodiff.unet import group_count


class ObsEncoder(nn.Module):
    """当前帧 ‖ 目标帧（6 通道）→ 图像特征"""

    def __init__(self, out_dim: int, channels: Sequence[int] = (16, 32), in_channels: int = 6):
        super().__init__()
        layers = []
        prev = in_channels
        for c in channels:
            layers += [
                nn.Conv2d(prev, c, 3, stride=2, padding=1),
                nn.GroupNorm(group_count(c), c),
                nn.Mish(),
            ]
            prev = c
        self.backbone = nn.Sequential(*layers, nn.AdaptiveAvgPool2d(1), nn.Flatten())
        self.head = nn.Linear(prev, out_dim)

    def forward(self, obs_stack: torch.Tensor) -> torch.Tensor:
        if obs_stack.dim() != 4 or obs_stack.shape[1] != 6:
            raise ShapeError(f"观测堆叠应为 (B, 6, H, W)，实际 {tuple(obs_stack.shape)}")
        return self.head(self.backbone(obs_stack))


class CoordEncoder(nn.Module):
    """坐标 MLP"""

    def __init__(self, in_dim: int, out_dim: int):
        super().__init__()
        self.in_dim = in_dim
        self.mlp = nn.Sequential(nn.Linear(in_dim, out_dim), nn.Mish(), nn.Linear(out_dim, out_dim))

    def forward(self, coord: torch.Tensor) -> torch.Tensor:
        if coord.shape[-1] != self.in_dim:
            raise ShapeError(f"坐标维度应为 {self.in_dim}，实际 {coord.shape[-1]}")
        return self.mlp(coord)
