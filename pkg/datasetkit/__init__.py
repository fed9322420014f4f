"""
数据集构建模块
"""
from .archive import ARCHIVE_VERSION, MAGIC, decode_archive, encode_archive, file_sha256, read_archive, write_archive
from .builders import build_policy_training_set, build_video_training_set, clip_windows, resampled_indices
from .manifest import load_manifest, manifest_entries, write_manifest
from .recorder import record_episodes, record_trajectory
from .segmentation import Phase, detect_fine_intervals, resample_trajectory

__all__ = [
    # 录制
    "record_trajectory",
    "record_episodes",
    # 分段与重采样
    "Phase",
    "detect_fine_intervals",
    "resample_trajectory",
    "resampled_indices",
    # 训练集
    "build_video_training_set",
    "build_policy_training_set",
    "clip_windows",
    # 归档与清单
    "ARCHIVE_VERSION",
    "MAGIC",
    "encode_archive",
    "decode_archive",
    "write_archive",
    "read_archive",
    "file_sha256",
    "manifest_entries",
    "write_manifest",
    "load_manifest",
]
