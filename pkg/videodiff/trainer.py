"""
扩散模型训练循环（视频模型与动作策略共用）
"""
import logging
import math
import time
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
import torch
import torch.nn as nn
from pydantic import BaseModel, ConfigDict, Field

from models.errors import TrainingDivergedError
from videodiff.ema import EMAModel

logger = logging.getLogger(__name__)

Collate = Callable[[Sequence[Any], Any], Any]


class TrainingConfig(BaseModel):
    """优化器 / 学习率 / EMA 配置"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    steps: int = Field(default=2000, ge=1)
    batch_size: int = Field(default=16, ge=1)
    lr: float = Field(default=1e-3, gt=0.0)
    weight_decay: float = Field(default=0.0, ge=0.0)
    warmup_steps: int = Field(default=100, ge=0)
    grad_clip: float = Field(default=1.0, gt=0.0)
    log_every: int = Field(default=100, ge=1)
    ema_decay: float = Field(default=0.999, gt=0.0, lt=1.0)
    ema_every: int = Field(default=10, ge=1)
    ema_warmup: bool = False
    seed: int = 0

    @classmethod
    def from_section(cls, section: BaseModel, seed: int) -> "TrainingConfig":
        """从 VideoSection / PolicySection 提取训练相关字段"""
        fields = {k: getattr(section, k) for k in cls.model_fields if k != "seed" and hasattr(section, k)}
        return cls(seed=seed, **fields)


class TrainingResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    steps: int
    loss_history: List[float]
    val_loss: Optional[float] = None
    wall_clock_seconds: float = 0.0


def warmup_cosine(warmup_steps: int, total_steps: int) -> Callable[[int], float]:
    """线性预热后余弦退火的学习率倍率"""
    def factor(step: int) -> float:
        if warmup_steps and step < warmup_steps:
            return (step + 1) / warmup_steps
        span = max(1, total_steps - warmup_steps)
        progress = min(1.0, (step - warmup_steps) / span)
        return 0.5 * (1.0 + math.cos(math.pi * progress))
    return factor


@torch.no_grad()
def evaluate_loss(model: nn.Module, samples: Sequence[Any], collate: Collate, batch_size: int = 16,
                  seed: int = 0, device: Any = "cpu") -> float:
    """固定随机种子的平均训练目标（验证损失）"""
    if not samples:
        return float("nan")
    generator = torch.Generator().manual_seed(seed)
    total, count = 0.0, 0
    for start in range(0, len(samples), batch_size):
        chunk = samples[start:start + batch_size]
        loss = model.training_loss(collate(chunk, device), generator)
        total += float(loss) * len(chunk)
        count += len(chunk)
    return total / count


class DiffusionTrainer:
    """AdamW + 预热余弦调度 + 梯度裁剪 + EMA 的通用训练器"""

    def __init__(self, model: nn.Module, collate: Collate, config: TrainingConfig,
                 device: Any = "cpu", name: str = "model"):
        self.model = model.to(device)
        self.collate = collate
        self.config = config
        self.device = device
        self.name = name
        self.optimizer = torch.optim.AdamW(model.parameters(), lr=config.lr, weight_decay=config.weight_decay)
        self.lr_scheduler = torch.optim.lr_scheduler.LambdaLR(
            self.optimizer, warmup_cosine(config.warmup_steps, config.steps)
        )
        self.ema = EMAModel(model, decay=config.ema_decay, update_every=config.ema_every,
                            use_warmup=config.ema_warmup)
        self.global_step = 0
        self.loss_history: List[float] = []
        self._rng = np.random.default_rng(config.seed)
        self._generator = torch.Generator().manual_seed(config.seed)

    def train_step(self, batch: Any) -> float:
        self.model.train()
        loss = self.model.training_loss(batch, self._generator)
        value = float(loss.detach())
        if not math.isfinite(value):
            raise TrainingDivergedError(f"{self.name} 第 {self.global_step} 步损失非有限: {value}")
        self.optimizer.zero_grad(set_to_none=True)
        loss.backward()
        nn.utils.clip_grad_norm_(self.model.parameters(), self.config.grad_clip)
        self.optimizer.step()
        self.lr_scheduler.step()
        self.ema.step(self.model)
        self.global_step += 1
        self.loss_history.append(value)
        return value

    def fit(self, samples: Sequence[Any], val_samples: Optional[Sequence[Any]] = None,
            steps: Optional[int] = None) -> TrainingResult:
        """训练至 steps（默认配置步数）；返回损失曲线"""
        if not samples:
            raise ValueError(f"{self.name} 训练集为空")
        target = steps if steps is not None else self.config.steps
        n = len(samples)
        started = time.perf_counter()
        logger.info(f"🚀 开始训练 {self.name}: {n} 条样本, 目标 {target} 步")

        while self.global_step < target:
            idx = self._rng.choice(n, size=min(self.config.batch_size, n), replace=False)
            value = self.train_step(self.collate([samples[i] for i in idx], self.device))
            if self.global_step % self.config.log_every == 0:
                lr = self.optimizer.param_groups[0]["lr"]
                logger.info(f"📉 {self.name} step {self.global_step}: loss={value:.5f} lr={lr:.2e}")

        val_loss = None
        if val_samples:
            val_loss = evaluate_loss(self.ema.averaged_model, val_samples, self.collate,
                                     self.config.batch_size, self.config.seed, self.device)
            logger.info(f"✅ {self.name} 验证损失(EMA): {val_loss:.5f}")
        return TrainingResult(
            steps=self.global_step,
            loss_history=list(self.loss_history),
            val_loss=val_loss,
            wall_clock_seconds=time.perf_counter() - started,
        )

    def state_dict(self) -> Dict[str, Any]:
        return {
            "model": self.model.state_dict(),
            "ema": self.ema.state_dict(),
            "optimizer": self.optimizer.state_dict(),
            "lr_scheduler": self.lr_scheduler.state_dict(),
            "step": self.global_step,
            "loss_history": list(self.loss_history),
            "rng": self._rng.bit_generator.state,
            "generator": self._generator.get_state(),
        }

    def load_state_dict(self, state: Dict[str, Any]) -> None:
        self.model.load_state_dict(state["model"])
        self.ema.load_state_dict(state["ema"])
        self.optimizer.load_state_dict(state["optimizer"])
        self.lr_scheduler.load_state_dict(state["lr_scheduler"])
        self.global_step = int(state["step"])
        self.loss_history = list(state["loss_history"])
        if "rng" in state:
            self._rng.bit_generator.state = state["rng"]
        if "generator" in state:
            self._generator.set_state(state["generator"])
