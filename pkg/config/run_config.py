"""
运行配置（单一配置文件驱动数据生成、训练与评估）
"""
import hashlib
import json
import logging
from pathlib import Path
from typing import List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from config.settings import settings
from models.env import DEFAULT_RESOLUTION, TaskId
from models.errors import ConfigurationError
from models.matching import MatchConfig
from models.plan import N_MAX
from models.trajectory import SegmentationParams

logger = logging.getLogger(__name__)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


def _check_betas(beta_1: float, beta_T: float) -> None:
    if not (0.0 < beta_1 <= beta_T < 1.0):
        raise ValueError(f"β 端点必须满足 0 < beta_1 ≤ beta_T < 1，实际 ({beta_1}, {beta_T})")


class EnvSection(_Section):
    """环境配置"""
    resolution: int = Field(default=DEFAULT_RESOLUTION, ge=8)
    tasks: List[TaskId] = Field(default_factory=lambda: list(TaskId), min_length=1)
    max_steps: int = Field(default=120, ge=1)


class DataSection(_Section):
    """数据集配置"""
    episodes_per_task: int = Field(default=10, ge=1)
    segmentation: SegmentationParams = Field(default_factory=SegmentationParams)
    include_failures: bool = False
    validation_fraction: float = Field(default=0.1, ge=0.0, lt=1.0)


class VideoSection(_Section):
    """视频扩散模型配置"""
    embed_dim: int = Field(default=16, ge=4)
    n_max: int = Field(default=N_MAX, ge=1)
    base_channels: int = Field(default=16, ge=4)
    timesteps: int = Field(default=1000, ge=2)
    beta_1: float = 1e-4
    beta_T: float = 0.02
    p_drop: float = Field(default=0.1, ge=0.0, le=1.0)
    use_subplan: bool = True
    ema_decay: float = Field(default=0.999, gt=0.0, lt=1.0)
    ema_every: int = Field(default=10, ge=1)
    ema_warmup: bool = True
    steps: int = Field(default=2000, ge=1)
    batch_size: int = Field(default=16, ge=1)
    lr: float = Field(default=1e-3, gt=0.0)
    weight_decay: float = Field(default=0.0, ge=0.0)
    warmup_steps: int = Field(default=100, ge=0)
    grad_clip: float = Field(default=1.0, gt=0.0)
    log_every: int = Field(default=100, ge=1)

    @model_validator(mode="after")
    def _check(self) -> "VideoSection":
        _check_betas(self.beta_1, self.beta_T)
        return self


class PolicySection(_Section):
    """动作策略配置"""
    horizon: int = Field(default=4, ge=1)
    goal_window: int = Field(default=20, ge=1, description="目标帧采样窗口 K")
    timesteps: int = Field(default=100, ge=2)
    beta_1: float = 1e-4
    beta_T: float = 2e-2
    cond_dim: int = Field(default=64, ge=4)
    coord_with_object: bool = False
    p_drop: float = Field(default=0.1, ge=0.0, le=1.0)
    ema_decay: float = Field(default=0.9999, gt=0.0, lt=1.0)
    ema_every: int = Field(default=1, ge=1)
    ema_warmup: bool = True
    steps: int = Field(default=2000, ge=1)
    batch_size: int = Field(default=32, ge=1)
    lr: float = Field(default=1e-3, gt=0.0)
    weight_decay: float = Field(default=1e-6, ge=0.0)
    warmup_steps: int = Field(default=100, ge=0)
    grad_clip: float = Field(default=1.0, gt=0.0)
    log_every: int = Field(default=100, ge=1)

    @model_validator(mode="after")
    def _check(self) -> "PolicySection":
        _check_betas(self.beta_1, self.beta_T)
        return self


class PipelineSection(_Section):
    """闭环推理配置"""
    regen_max: int = Field(default=5, ge=1, description="视频最大生成次数 R_max")
    stuck_window: int = Field(default=24, ge=2, description="停滞检测窗口 W")
    stuck_delta: float = Field(default=0.01, gt=0.0, description="停滞位移阈值")
    match: MatchConfig = Field(default_factory=MatchConfig)
    video_guidance: float = Field(default=2.0, ge=0.0)
    policy_guidance: float = Field(default=1.0, ge=0.0)
    video_sample_steps: int = Field(default=50, ge=1)
    policy_sample_steps: int = Field(default=10, ge=1)
    mask_ratio: float = Field(default=0.0, ge=0.0, lt=1.0)
    persistence_ratio: float = Field(default=0.5, gt=0.0, le=1.0)
    progress_tolerance_px: float = Field(default=1.5, ge=0.0)
    remote_validator: bool = False
    use_remote_planner: bool = False


class RunConfig(_Section):
    """运行配置"""
    seed: int = 0
    env: EnvSection = Field(default_factory=EnvSection)
    data: DataSection = Field(default_factory=DataSection)
    video: VideoSection = Field(default_factory=VideoSection)
    policy: PolicySection = Field(default_factory=PolicySection)
    pipeline: PipelineSection = Field(default_factory=PipelineSection)

    @model_validator(mode="after")
    def _check_cross_sections(self) -> "RunConfig":
        if self.pipeline.video_sample_steps > self.video.timesteps:
            raise ValueError("视频采样步数不能超过扩散步数")
        if self.pipeline.policy_sample_steps > self.policy.timesteps:
            raise ValueError("动作采样步数不能超过扩散步数")
        return self


def dump_run_config(cfg: RunConfig) -> str:
    """规范序列化（键排序）"""
    return json.dumps(cfg.model_dump(mode="json"), sort_keys=True, indent=2, ensure_ascii=False)


def config_hash(cfg: RunConfig) -> str:
    """配置哈希（规范 JSON 的 sha256 前 12 位）"""
    canonical = json.dumps(cfg.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def parse_run_config(raw: Union[str, dict], seed: Optional[int] = None) -> RunConfig:
    """从 JSON 文本或字典构造配置，种子优先级: 参数 > 环境变量 SEED > 文件"""
    try:
        data = json.loads(raw) if isinstance(raw, str) else dict(raw)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"配置文件不是合法 JSON: {e}") from e
    override = seed if seed is not None else settings.SEED
    if override is not None:
        data["seed"] = int(override)
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(f"配置不合法: {e}") from e


def load_run_config(path: Optional[Union[str, Path]] = None, seed: Optional[int] = None) -> RunConfig:
    """加载配置文件；path 为空时使用默认配置"""
    if path is None:
        cfg = parse_run_config({}, seed)
    else:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigurationError(f"无法读取配置文件 {path}: {e}") from e
        cfg = parse_run_config(text, seed)
    logger.info(f"✅ 运行配置已加载, hash={config_hash(cfg)}, seed={cfg.seed}")
    return cfg
