"""
训练集构建：视频片段样本与策略样本
"""
import logging
from typing import Callable, List, Optional, Sequence

import numpy as np

from actionpolicy.policy import ACTION_DIM, PolicySample, sample_goal_index
from conditioning.encoder import tokenize_plan
from datasetkit.segmentation import detect_fine_intervals, resample_trajectory
from models.plan import N_MAX, PlanTable, SpatialState
from models.trajectory import SegmentationParams, TrajectoryRecord
from models.video import CLIP_LENGTH
from spatialplan.grammar import serialize_plan
from spatialplan.oracle import generate_plan
from videodiff.model import VideoSample

logger = logging.getLogger(__name__)

PlanOracle = Callable[[Sequence[float], str], PlanTable]


def resampled_indices(record: TrajectoryRecord, params: SegmentationParams) -> List[int]:
    return resample_trajectory(record.length, detect_fine_intervals(record.distance, params), params)


def clip_windows(n_frames: int, clip_length: int = CLIP_LENGTH) -> List[List[int]]:
    """滑动窗口（位置下标）；不足一个窗口时以末帧右侧补齐"""
    if n_frames >= clip_length:
        return [list(range(s, s + clip_length)) for s in range(n_frames - clip_length + 1)]
    return [list(range(n_frames)) + [n_frames - 1] * (clip_length - n_frames)]


def _usable(records: Sequence[TrajectoryRecord], include_failures: bool) -> List[TrajectoryRecord]:
    kept = [r for r in records if r.success or include_failures]
    if len(kept) < len(records):
        logger.info(f"跳过 {len(records) - len(kept)} 条失败轨迹")
    return kept


def build_video_training_set(records: Sequence[TrajectoryRecord], params: Optional[SegmentationParams] = None,
                             plan_oracle: PlanOracle = generate_plan, n_max: int = N_MAX,
                             include_failures: bool = False) -> List[VideoSample]:
    """重采样后的 8 帧滑窗；条件规划由窗口首帧的空间状态生成"""
    params = params or SegmentationParams()
    samples: List[VideoSample] = []
    for record in _usable(records, include_failures):
        idx = resampled_indices(record, params)
        if len(idx) < 2:
            logger.warning(f"⚠️ 轨迹过短已跳过: {record.task_id.value} seed={record.seed} 长度={len(idx)}")
            continue
        for window in clip_windows(len(idx)):
            frames = [idx[w] for w in window]
            first = frames[0]
            state = SpatialState.from_positions(record.ee_pos[first], record.obj_pos[first])
            plan = plan_oracle(state.delta_p, record.task_id.value)
            samples.append(VideoSample(
                observation=record.frames[first],
                future=record.frames[frames[1:]],
                tokens=tokenize_plan(plan, n_max),
                task_id=record.task_id,
                plan_text=serialize_plan(plan),
            ))
    logger.info(f"✅ 视频训练集: {len(samples)} 条样本")
    return samples


def build_policy_training_set(records: Sequence[TrajectoryRecord], k: int = 20, horizon: int = 4, seed: int = 0,
                              include_failures: bool = False) -> List[PolicySample]:
    """逐帧样本：目标帧在 (i, i+K] 内采样，标签为 H 步专家动作（末尾补零）"""
    rng = np.random.default_rng(seed)
    samples: List[PolicySample] = []
    for record in _usable(records, include_failures):
        last = record.length - 1
        if last < 1:
            logger.warning(f"⚠️ 轨迹过短已跳过: {record.task_id.value} seed={record.seed}")
            continue
        padded = np.concatenate([record.actions, np.zeros((horizon, ACTION_DIM))])
        for i in range(last):
            goal = sample_goal_index(i, last, k, rng)
            samples.append(PolicySample(
                current=record.frames[i],
                goal=record.frames[goal],
                p_ee=record.ee_pos[i],
                p_obj=record.obj_pos[i],
                actions=padded[i:i + horizon],
                task_id=record.task_id,
            ))
    logger.info(f"✅ 策略训练集: {len(samples)} 条样本")
    return samples
