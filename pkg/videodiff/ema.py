"""
参数指数滑动平均（EMA）
"""
import copy
from typing import Any, Dict

import torch
import torch.nn as nn


class EMAModel:
    """EMA 影子模型

    关闭预热时每次更新为 decay·shadow + (1−decay)·param；
    开启预热时衰减为 1 − (1 + n/inv_gamma)^(−power)，上限为 decay。
    """

    def __init__(self, model: nn.Module, decay: float = 0.999, update_every: int = 1,
                 update_after_step: int = 0, use_warmup: bool = False,
                 inv_gamma: float = 1.0, power: float = 2 / 3, min_decay: float = 0.0):
        if not 0.0 < decay < 1.0:
            raise ValueError(f"EMA 衰减必须位于 (0, 1): {decay}")
        self.averaged_model = copy.deepcopy(model).eval()
        self.averaged_model.requires_grad_(False)
        self.decay = decay
        self.update_every = max(1, int(update_every))
        self.update_after_step = int(update_after_step)
        self.use_warmup = use_warmup
        self.inv_gamma = inv_gamma
        self.power = power
        self.min_decay = min_decay
        self.optimization_step = 0
        self.num_updates = 0

    def get_decay(self) -> float:
        if not self.use_warmup:
            return self.decay
        value = 1.0 - (1.0 + self.num_updates / self.inv_gamma) ** -self.power
        return float(min(self.decay, max(self.min_decay, value)))

    @torch.no_grad()
    def step(self, model: nn.Module) -> bool:
        """记录一次优化步；按节奏更新影子参数，返回是否发生更新"""
        self.optimization_step += 1
        if self.optimization_step <= self.update_after_step:
            return False
        if (self.optimization_step - self.update_after_step) % self.update_every != 0:
            return False
        decay = self.get_decay()
        for shadow, param in zip(self.averaged_model.parameters(), model.parameters()):
            shadow.mul_(decay).add_(param.detach(), alpha=1.0 - decay)
        for shadow, buf in zip(self.averaged_model.buffers(), model.buffers()):
            shadow.copy_(buf)
        self.num_updates += 1
        return True

    def state_dict(self) -> Dict[str, Any]:
        return {
            "averaged_model": self.averaged_model.state_dict(),
            "optimization_step": self.optimization_step,
            "num_updates": self.num_updates,
            "decay": self.decay,
        }

    def load_state_dict(self, state: Dict[str, Any]) -> None:
        self.averaged_model.load_state_dict(state["averaged_model"])
        self.optimization_step = int(state["optimization_step"])
        self.num_updates = int(state["num_updates"])
