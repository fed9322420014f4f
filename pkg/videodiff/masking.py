"""
输入遮挡（鲁棒性评估）
"""
import numpy as np

from models.errors import RangeError


def mask_input(frame: np.ndarray, ratio: float, seed: int) -> np.ndarray:
    """随机将若干方形块置零，直到遮挡比例达到 ratio"""
    if not 0.0 <= ratio < 1.0:
        raise RangeError(f"遮挡比例必须位于 [0, 1)，实际 {ratio}")
    out = np.array(frame, copy=True)
    if ratio == 0.0:
        return out

    height, width = out.shape[:2]
    patch = max(2, min(height, width) // 8)
    rng = np.random.default_rng(seed)
    mask = np.zeros((height, width), dtype=bool)
    target = ratio * height * width
    while mask.sum() < target:
        row = int(rng.integers(0, height - patch + 1))
        col = int(rng.integers(0, width - patch + 1))
        mask[row:row + patch, col:col + patch] = True
    out[mask] = 0.0
    return out
