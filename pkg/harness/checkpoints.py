"""
检查点读写
"""
import logging
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import torch
import torch.nn as nn
from pydantic import BaseModel, ConfigDict, Field

from actionpolicy import ActionNormalizer, DiffusionPolicy, PolicyModelConfig
from config.run_config import RunConfig, config_hash, dump_run_config
from models.errors import CheckpointError, CheckpointVersionError, ConfigMismatchError, ConfigurationError
from videodiff import DiffusionTrainer, VideoDiffusionModel, VideoModelConfig

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1


class ModelKind(str, Enum):
    """检查点中的模型类型"""
    VIDEO = "video"
    POLICY = "policy"


class Checkpoint(BaseModel):
    """已加载的检查点"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    version: int
    kind: ModelKind
    config_hash: str
    run_config: RunConfig
    architecture: Dict[str, Any]
    trainer_state: Dict[str, Any]
    loss_history: List[float] = Field(default_factory=list)
    val_loss: Optional[float] = None
    normalizer: Optional[Dict[str, Any]] = None


def save_checkpoint(path: Union[str, Path], kind: ModelKind, trainer: DiffusionTrainer, cfg: RunConfig,
                    architecture: BaseModel, val_loss: Optional[float] = None,
                    normalizer: Optional[ActionNormalizer] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "version": CHECKPOINT_VERSION,
        "kind": ModelKind(kind).value,
        "config_hash": config_hash(cfg),
        "run_config": dump_run_config(cfg),
        "architecture": architecture.model_dump(mode="json"),
        "trainer_state": trainer.state_dict(),
        "loss_history": list(trainer.loss_history),
        "val_loss": val_loss,
        "normalizer": normalizer.state_dict() if normalizer is not None else None,
    }
    try:
        torch.save(payload, path)
    except OSError as e:
        raise CheckpointError(f"无法写入检查点 {path}: {e}") from e
    logger.info(f"✅ {ModelKind(kind).value} 检查点已保存: {path} (step={trainer.global_step})")
    return path


def load_checkpoint(path: Union[str, Path], expected_kind: Optional[ModelKind] = None) -> Checkpoint:
    """读取检查点；文件缺失视为配置错误，未来版本拒绝加载"""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"检查点不存在: {path}")
    try:
        payload = torch.load(path, map_location="cpu", weights_only=False)
    except Exception as e:
        raise CheckpointError(f"无法读取检查点 {path}: {e}") from e
    if not isinstance(payload, dict) or "version" not in payload:
        raise CheckpointError(f"检查点格式错误: {path}")
    version = int(payload["version"])
    if version > CHECKPOINT_VERSION:
        raise CheckpointVersionError(f"检查点版本 {version} 高于当前支持的版本 {CHECKPOINT_VERSION}: {path}")
    kind = ModelKind(payload["kind"])
    if expected_kind is not None and kind != expected_kind:
        raise ConfigurationError(f"检查点类型为 {kind.value}，期望 {expected_kind.value}: {path}")
    return Checkpoint(
        version=version,
        kind=kind,
        config_hash=payload["config_hash"],
        run_config=RunConfig.model_validate_json(payload["run_config"]),
        architecture=payload["architecture"],
        trainer_state=payload["trainer_state"],
        loss_history=payload.get("loss_history", []),
        val_loss=payload.get("val_loss"),
        normalizer=payload.get("normalizer"),
    )


def build_model(ckpt: Checkpoint, use_ema: bool = True) -> nn.Module:
    """按检查点结构重建模型并载入权重（默认载入 EMA 权重）"""
    if ckpt.kind is ModelKind.VIDEO:
        model: nn.Module = VideoDiffusionModel(VideoModelConfig.model_validate(ckpt.architecture))
    else:
        normalizer = ActionNormalizer.from_state_dict(ckpt.normalizer) if ckpt.normalizer else None
        model = DiffusionPolicy(PolicyModelConfig.model_validate(ckpt.architecture), normalizer)
    state = ckpt.trainer_state["ema"]["averaged_model"] if use_ema else ckpt.trainer_state["model"]
    model.load_state_dict(state)
    model.eval()
    return model


def _differing_sections(old: RunConfig, new: RunConfig) -> List[str]:
    a, b = old.model_dump(mode="json"), new.model_dump(mode="json")
    return sorted(k for k in set(a) | set(b) if a.get(k) != b.get(k))


def check_resume(ckpt: Checkpoint, cfg: RunConfig) -> None:
    """续训要求配置哈希一致"""
    current = config_hash(cfg)
    if ckpt.config_hash != current:
        sections = ", ".join(_differing_sections(ckpt.run_config, cfg)) or "未知"
        raise ConfigMismatchError(
            f"配置哈希不一致: 检查点 {ckpt.config_hash}，当前 {current}；差异字段: {sections}"
        )


def check_architecture(ckpt: Checkpoint, architecture: BaseModel) -> None:
    """微调要求模型结构一致"""
    current = architecture.model_dump(mode="json")
    if ckpt.architecture != current:
        keys = sorted(k for k in set(current) | set(ckpt.architecture) if current.get(k) != ckpt.architecture.get(k))
        raise ConfigMismatchError(f"模型结构与检查点不一致: {', '.join(keys)}")
