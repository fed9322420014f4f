"""
数据生成、训练与评估服务
"""
import logging
import time
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import torch
from skimage import io as skio
from skimage.util import img_as_float

from actionpolicy import build_policy
from agents.agent_manager import AgentManager
from config.run_config import RunConfig, config_hash
from config.settings import settings
from datasetkit import (
    build_policy_training_set,
    build_video_training_set,
    file_sha256,
    load_manifest,
    manifest_entries,
    read_archive,
    record_trajectory,
    write_archive,
    write_manifest,
)
from envsim import default_task
from framematch import composite_similarity
from harness.checkpoints import (
    ModelKind,
    build_model,
    check_architecture,
    check_resume,
    load_checkpoint,
    save_checkpoint,
)
from harness.metrics import aggregate_reports, write_episode_logs, write_loss_chart, write_metrics_report
from models.env import TaskId, TaskSpec
from models.errors import ArchiveFormatError, ConfigurationError, DataMismatchError, FrameFormatError
from models.matching import MatchConfig, MatchScore
from models.plan import SpatialState
from models.report import EpisodeReport, MetricsReport
from models.trajectory import DatasetManifest, TrajectoryRecord
from spatialplan import generate_plan, serialize_plan
from spatialplan.vlm_client import PlanOracleClient
from videodiff import DiffusionTrainer, TrainingConfig, TrainingResult, build_video_model, collate_video

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
EVAL_SEED_OFFSET = 100_000


def task_specs(cfg: RunConfig) -> List[TaskSpec]:
    return [default_task(t).model_copy(update={"max_steps": cfg.env.max_steps}) for t in cfg.env.tasks]


def run_directory(cfg: RunConfig, root: Optional[Union[str, Path]] = None) -> Path:
    """运行产物目录，目录名包含配置哈希"""
    path = Path(root or settings.RUN_ROOT) / f"run-{config_hash(cfg)}"
    path.mkdir(parents=True, exist_ok=True)
    return path


def training_seeds(cfg: RunConfig) -> range:
    return range(cfg.seed, cfg.seed + cfg.data.episodes_per_task)


def eval_seeds(cfg: RunConfig, n_episodes: int) -> range:
    # 与训练种子不重叠
    return range(cfg.seed + EVAL_SEED_OFFSET, cfg.seed + EVAL_SEED_OFFSET + n_episodes)


# ---- 数据 ----

def gen_data(cfg: RunConfig, out_dir: Union[str, Path]) -> DatasetManifest:
    """录制专家轨迹，每回合写一个归档文件，并写出清单"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    params = cfg.data.segmentation
    entries = []
    for task in task_specs(cfg):
        for seed in training_seeds(cfg):
            record = record_trajectory(task, seed, cfg.env.resolution)
            name = f"{task.task_id.value}_{seed:05d}.svpa"
            sha = write_archive([record], out_dir / name)
            entries.extend(manifest_entries([record], name, sha, params))
    manifest = DatasetManifest(
        config_hash=config_hash(cfg),
        resolution=cfg.env.resolution,
        tasks=list(cfg.env.tasks),
        segmentation=params,
        entries=entries,
    )
    write_manifest(manifest, out_dir / MANIFEST_NAME)
    success = sum(e.success for e in entries)
    logger.info(f"✅ 已生成 {len(entries)} 条轨迹 ({success} 条成功) → {out_dir}")
    return manifest


def load_dataset(cfg: RunConfig, data_dir: Union[str, Path]) -> List[TrajectoryRecord]:
    """读取清单与归档；分辨率或任务集合与配置不一致时在训练前报错"""
    data_dir = Path(data_dir)
    manifest = load_manifest(data_dir / MANIFEST_NAME)
    if manifest.resolution != cfg.env.resolution:
        raise DataMismatchError(f"数据分辨率 {manifest.resolution} 与配置 {cfg.env.resolution} 不一致")
    if set(manifest.tasks) != set(cfg.env.tasks):
        raise DataMismatchError(
            f"数据任务集合 {sorted(t.value for t in manifest.tasks)} 与配置 "
            f"{sorted(t.value for t in cfg.env.tasks)} 不一致"
        )
    records: List[TrajectoryRecord] = []
    for path in sorted({e.path for e in manifest.entries}):
        archive = data_dir / path
        if not archive.is_file():
            raise DataMismatchError(f"清单引用的归档不存在: {archive}")
        expected = next(e.sha256 for e in manifest.entries if e.path == path)
        if file_sha256(archive) != expected:
            raise ArchiveFormatError(f"归档校验和与清单不一致: {archive}")
        records.extend(read_archive(archive))
    logger.info(f"✅ 已加载 {len(records)} 条轨迹")
    return records


def split_records(records: Sequence[TrajectoryRecord], fraction: float,
                  seed: int) -> Tuple[List[TrajectoryRecord], List[TrajectoryRecord]]:
    """按固定种子划分训练 / 验证轨迹"""
    n_val = int(len(records) * fraction)
    if n_val == 0:
        return list(records), []
    order = np.random.default_rng(seed).permutation(len(records))
    val = {int(i) for i in order[:n_val]}
    return ([r for i, r in enumerate(records) if i not in val],
            [r for i, r in enumerate(records) if i in val])


# ---- 训练 ----

def _prepare_trainer(kind: ModelKind, trainer: DiffusionTrainer, architecture, cfg: RunConfig,
                     resume: Optional[Union[str, Path]], init_from: Optional[Union[str, Path]]) -> None:
    if resume is not None:
        ckpt = load_checkpoint(resume, kind)
        check_resume(ckpt, cfg)
        trainer.load_state_dict(ckpt.trainer_state)
        logger.info(f"🔄 从 {resume} 续训 (step={trainer.global_step})")
    elif init_from is not None:
        ckpt = load_checkpoint(init_from, kind)
        check_architecture(ckpt, architecture)
        weights = ckpt.trainer_state["ema"]["averaged_model"]
        trainer.model.load_state_dict(weights)
        trainer.ema.averaged_model.load_state_dict(weights)
        logger.info(f"🔄 从 {init_from} 初始化权重后微调")


def train_video(cfg: RunConfig, data_dir: Union[str, Path], out_ckpt: Union[str, Path],
                resume: Optional[Union[str, Path]] = None,
                init_from: Optional[Union[str, Path]] = None) -> TrainingResult:
    records = load_dataset(cfg, data_dir)
    train_records, val_records = split_records(records, cfg.data.validation_fraction, cfg.seed)
    kwargs = dict(params=cfg.data.segmentation, n_max=cfg.video.n_max, include_failures=cfg.data.include_failures)
    samples = build_video_training_set(train_records, **kwargs)
    val_samples = build_video_training_set(val_records, **kwargs)

    torch.manual_seed(cfg.seed)
    model = build_video_model(cfg)
    architecture = model.config
    trainer = DiffusionTrainer(model, collate_video, TrainingConfig.from_section(cfg.video, cfg.seed),
                               device=settings.DEVICE, name="video")
    _prepare_trainer(ModelKind.VIDEO, trainer, architecture, cfg, resume, init_from)
    result = trainer.fit(samples, val_samples)
    save_checkpoint(out_ckpt, ModelKind.VIDEO, trainer, cfg, architecture, result.val_loss)
    return result


def train_policy(cfg: RunConfig, data_dir: Union[str, Path], out_ckpt: Union[str, Path],
                 resume: Optional[Union[str, Path]] = None,
                 init_from: Optional[Union[str, Path]] = None) -> TrainingResult:
    records = load_dataset(cfg, data_dir)
    train_records, val_records = split_records(records, cfg.data.validation_fraction, cfg.seed)
    p = cfg.policy
    samples = build_policy_training_set(train_records, k=p.goal_window, horizon=p.horizon, seed=cfg.seed,
                                        include_failures=cfg.data.include_failures)
    val_samples = build_policy_training_set(val_records, k=p.goal_window, horizon=p.horizon, seed=cfg.seed + 1,
                                            include_failures=cfg.data.include_failures)

    torch.manual_seed(cfg.seed)
    model = build_policy(cfg)
    architecture = model.config
    trainer = DiffusionTrainer(model, model.collate, TrainingConfig.from_section(p, cfg.seed),
                               device=settings.DEVICE, name="policy")
    _prepare_trainer(ModelKind.POLICY, trainer, architecture, cfg, resume, init_from)
    result = trainer.fit(samples, val_samples)
    save_checkpoint(out_ckpt, ModelKind.POLICY, trainer, cfg, architecture, result.val_loss, model.normalizer)
    return result


# ---- 评估 ----

def load_models(cfg: RunConfig, video_ckpt: Union[str, Path], policy_ckpt: Union[str, Path]):
    """加载两个检查点（EMA 权重）"""
    video = load_checkpoint(video_ckpt, ModelKind.VIDEO)
    policy = load_checkpoint(policy_ckpt, ModelKind.POLICY)
    for ckpt in (video, policy):
        if ckpt.run_config.env.resolution != cfg.env.resolution:
            raise DataMismatchError(
                f"{ckpt.kind.value} 检查点分辨率 {ckpt.run_config.env.resolution} 与配置 {cfg.env.resolution} 不一致"
            )
        if ckpt.config_hash != config_hash(cfg):
            logger.warning(f"⚠️ {ckpt.kind.value} 检查点配置哈希 {ckpt.config_hash} 与当前配置不同")
    curves = {"video": video.loss_history, "policy": policy.loss_history}
    return build_model(video), build_model(policy), curves


def _manager(cfg: RunConfig, video_ckpt, policy_ckpt, planner_client: Optional[PlanOracleClient]):
    video, policy, curves = load_models(cfg, video_ckpt, policy_ckpt)
    manager = AgentManager(cfg)
    manager.initialize(video, policy, planner_client)
    return manager, curves


async def evaluate(cfg: RunConfig, video_ckpt: Union[str, Path], policy_ckpt: Union[str, Path],
                   n_episodes: int, out_dir: Union[str, Path], mask_ratio: Optional[float] = None,
                   planner_client: Optional[PlanOracleClient] = None) -> MetricsReport:
    """每个任务运行 n_episodes 个种子回合，聚合指标并写出报告与事件日志"""
    if n_episodes < 1:
        raise ConfigurationError("评估回合数必须为正整数")
    started = time.perf_counter()
    manager, curves = _manager(cfg, video_ckpt, policy_ckpt, planner_client)
    reports = await manager.run_episodes(task_specs(cfg), eval_seeds(cfg, n_episodes), mask_ratio)

    out_dir = Path(out_dir)
    write_episode_logs(reports, out_dir)
    report = aggregate_reports(reports, config_hash(cfg), curves, time.perf_counter() - started)
    write_metrics_report(report, out_dir / "metrics.json")
    write_loss_chart(curves, out_dir / "loss_curves.html")
    for t in report.per_task:
        logger.info(f"📊 {t.task_id.value}: 成功率 {t.success_rate:.2f}, 平均步数 {t.mean_steps:.1f}, "
                    f"平均重规划 {t.mean_replans:.2f}")
    return report


async def rollout(cfg: RunConfig, video_ckpt: Union[str, Path], policy_ckpt: Union[str, Path],
                  task_id: Union[TaskId, str], seed: int, out_dir: Union[str, Path],
                  mask_ratio: Optional[float] = None, stall: Optional[Tuple[int, int]] = None,
                  planner_client: Optional[PlanOracleClient] = None) -> EpisodeReport:
    """单回合推理，写出事件日志"""
    task_id = TaskId.parse(task_id)
    task = next((t for t in task_specs(cfg) if t.task_id == task_id), None)
    if task is None:
        raise ConfigurationError(f"任务 {task_id.value} 不在配置的任务集合中")
    manager, _ = _manager(cfg, video_ckpt, policy_ckpt, planner_client)
    report = await manager.run_episode(task, seed, mask_ratio, stall)
    write_episode_logs([report], out_dir)
    return report


# ---- 诊断 ----

def plan_text(p_ee: Sequence[float], p_obj: Sequence[float], task_id: Union[TaskId, str]) -> str:
    state = SpatialState.from_positions(p_ee, p_obj)
    return serialize_plan(generate_plan(state.delta_p, task_id))


def load_frame(path: Union[str, Path]) -> np.ndarray:
    """读取图像为 (H, W, 3) float，取值 [0, 1]；支持 .npy"""
    path = Path(path)
    try:
        if path.suffix == ".npy":
            frame = np.load(path)
        else:
            frame = img_as_float(skio.imread(str(path)))
        frame = np.asarray(frame, dtype=np.float64)
    except (OSError, ValueError) as e:
        raise FrameFormatError(f"无法读取图像 {path}: {e}") from e
    if frame.ndim == 2:
        frame = np.repeat(frame[..., None], 3, axis=-1)
    if frame.ndim != 3 or frame.shape[-1] not in (3, 4):
        raise FrameFormatError(f"无法识别的图像形状 {frame.shape}: {path}")
    return np.clip(frame[..., :3], 0.0, 1.0)


def save_frame(frame: np.ndarray, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    skio.imsave(str(path), np.round(np.clip(frame, 0.0, 1.0) * 255).astype(np.uint8), check_contrast=False)
    return path


def match_frames(path_a: Union[str, Path], path_b: Union[str, Path],
                 cfg: Optional[MatchConfig] = None) -> MatchScore:
    return composite_similarity(load_frame(path_a), load_frame(path_b), cfg or MatchConfig())
