"""
数据集清单
"""
import logging
from pathlib import Path
from typing import List, Sequence, Union

from datasetkit.segmentation import detect_fine_intervals, resample_trajectory
from models.errors import ConfigurationError
from models.trajectory import DatasetManifest, ManifestEntry, SegmentationParams, TrajectoryRecord

logger = logging.getLogger(__name__)


def manifest_entries(records: Sequence[TrajectoryRecord], archive_path: Union[str, Path], sha256: str,
                     params: SegmentationParams) -> List[ManifestEntry]:
    entries = []
    for record in records:
        intervals = detect_fine_intervals(record.distance, params)
        entries.append(ManifestEntry(
            path=str(archive_path),
            task_id=record.task_id,
            seed=record.seed,
            length=record.length,
            success=record.success,
            fine_intervals=intervals,
            resampled_indices=resample_trajectory(record.length, intervals, params),
            sha256=sha256,
        ))
    return entries


def write_manifest(manifest: DatasetManifest, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(manifest.model_dump_json(indent=2), encoding="utf-8")
    logger.info(f"✅ 数据集清单已写入 {path}")
    return path


def load_manifest(path: Union[str, Path]) -> DatasetManifest:
    try:
        return DatasetManifest.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as e:
        raise ConfigurationError(f"无法读取数据集清单 {path}: {e}") from e
