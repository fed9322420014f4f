"""
精细操作区间检测（滞回状态机）与重采样
"""
from enum import Enum
from typing import List, Sequence, Tuple

from models.trajectory import SegmentationParams

Interval = Tuple[int, int]


class Phase(str, Enum):
    COARSE = "coarse"
    FINE = "fine"


def detect_fine_intervals(distances: Sequence[float], params: SegmentationParams) -> List[Interval]:
    """距离序列 → 精细区间 [start, end] 列表（有序、互不相交）

    连续 consecutive_frames 帧 ≤ 阈值进入 FINE，区间从该段首帧开始；
    FINE 中超阈值帧为异常，连续异常数超过容忍上限时退出，区间止于最后一个低于阈值的帧。
    退出后需经过 recovery_needed_frames 个粗帧才允许再次进入。
    """
    threshold = params.distance_threshold
    tolerance = max(params.max_allowed_anomaly, 1 if params.suppress_single_spike else 0)
    intervals: List[Interval] = []

    phase = Phase.COARSE
    earliest = 0
    run_start, run_len = 0, 0
    start, last_below, anomalies = 0, 0, 0

    for i, d in enumerate(distances):
        below = d <= threshold
        if phase is Phase.COARSE:
            if below and i >= earliest:
                if run_len == 0:
                    run_start = i
                run_len += 1
                if run_len >= params.consecutive_frames:
                    phase = Phase.FINE
                    start, last_below, anomalies = run_start, i, 0
            else:
                run_len = 0
        elif below:
            last_below, anomalies = i, 0
        else:
            anomalies += 1
            if anomalies > tolerance:
                intervals.append((start, last_below))
                earliest = last_below + 1 + params.recovery_needed_frames
                phase, run_len = Phase.COARSE, 0

    if phase is Phase.FINE:
        intervals.append((start, last_below))
    return intervals


def resample_trajectory(length: int, intervals: Sequence[Interval], params: SegmentationParams) -> List[int]:
    """粗区间按 interval 取帧，精细区间按 5 倍密度取帧；首末帧总保留"""
    if length <= 0:
        return []
    fine = [False] * length
    for s, e in intervals:
        for i in range(max(0, s), min(length - 1, e) + 1):
            fine[i] = True
    keep = {0, length - 1}
    for i in range(length):
        stride = params.fine_stride if fine[i] else params.interval
        if i % stride == 0:
            keep.add(i)
    return sorted(keep)
