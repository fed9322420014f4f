"""
帧相似度指标：轮廓、位置、结构与运动
"""
import math
from typing import Optional, Tuple

import numpy as np
from scipy import ndimage
from skimage.filters import sobel
from skimage.metrics import structural_similarity

from models.errors import ShapeError
from models.matching import MatchConfig, MatchScore

EDGE_EPS = 1e-6


def _check_pair(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"帧形状不一致: {a.shape} vs {b.shape}")


def to_gray(frame: np.ndarray) -> np.ndarray:
    """通道均值灰度"""
    frame = np.asarray(frame, dtype=np.float64)
    return frame.mean(axis=-1) if frame.ndim == 3 else frame


def edge_map(gray: np.ndarray, fraction: float = 0.2) -> np.ndarray:
    """梯度幅值前 fraction 的像素（幅值需大于 EDGE_EPS）"""
    magnitude = sobel(gray)
    strong = magnitude > EDGE_EPS
    if not strong.any():
        return strong
    cutoff = np.quantile(magnitude, 1.0 - fraction)
    return strong & (magnitude >= cutoff)


def sim_geo(a: np.ndarray, b: np.ndarray, cfg: Optional[MatchConfig] = None) -> float:
    """边缘集合 IoU；两边都没有边缘时为 1"""
    _check_pair(a, b)
    fraction = (cfg or MatchConfig()).edge_fraction
    ea, eb = edge_map(to_gray(a), fraction), edge_map(to_gray(b), fraction)
    union = np.logical_or(ea, eb).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(ea, eb).sum() / union)


def center_of_mass(gray: np.ndarray) -> Tuple[float, float]:
    """亮度质心；全黑时取图像中心"""
    if gray.sum() <= 0:
        return (gray.shape[0] - 1) / 2.0, (gray.shape[1] - 1) / 2.0
    row, col = ndimage.center_of_mass(gray)
    return float(row), float(col)


def block_means(gray: np.ndarray, grid: int = 4) -> np.ndarray:
    rows = np.array_split(np.arange(gray.shape[0]), grid)
    cols = np.array_split(np.arange(gray.shape[1]), grid)
    return np.array([[gray[np.ix_(r, c)].mean() for c in cols] for r in rows])


def sim_pos(a: np.ndarray, b: np.ndarray, cfg: Optional[MatchConfig] = None) -> float:
    """0.5·分块亮度得分 + 0.5·质心偏移得分"""
    _check_pair(a, b)
    grid = (cfg or MatchConfig()).block_grid
    ga, gb = to_gray(a), to_gray(b)
    block_score = 1.0 - float(np.abs(block_means(ga, grid) - block_means(gb, grid)).mean())
    (ra, ca), (rb, cb) = center_of_mass(ga), center_of_mass(gb)
    diagonal = math.hypot(ga.shape[0] - 1, ga.shape[1] - 1) or 1.0
    com_score = 1.0 - math.hypot(ra - rb, ca - cb) / diagonal
    return float(np.clip(0.5 * block_score + 0.5 * com_score, 0.0, 1.0))


def ssim(a: np.ndarray, b: np.ndarray, cfg: Optional[MatchConfig] = None) -> float:
    """灰度 SSIM（均匀窗口、总体协方差，L = 1），截断到 [0, 1]"""
    _check_pair(a, b)
    window = (cfg or MatchConfig()).ssim_window
    ga, gb = to_gray(a), to_gray(b)
    if min(ga.shape) < window:
        raise ShapeError(f"帧尺寸 {ga.shape} 小于 SSIM 窗口 {window}")
    value = structural_similarity(ga, gb, win_size=window, data_range=1.0,
                                  gaussian_weights=False, use_sample_covariance=False)
    return float(np.clip(value, 0.0, 1.0))


def block_flow(a: np.ndarray, b: np.ndarray, block: int = 8, search: int = 4) -> np.ndarray:
    """块匹配光流（SAD），返回每块位移 (n_blocks, 2)；同分时取位移最小者"""
    _check_pair(a, b)
    ga, gb = to_gray(a), to_gray(b)
    height, width = ga.shape
    candidates = sorted(
        ((dy, dx) for dy in range(-search, search + 1) for dx in range(-search, search + 1)),
        key=lambda d: (d[0] ** 2 + d[1] ** 2, d),
    )
    vectors = []
    for r in range(0, height - block + 1, block):
        for c in range(0, width - block + 1, block):
            ref = ga[r:r + block, c:c + block]
            best, best_sad = (0, 0), math.inf
            for dy, dx in candidates:
                rr, cc = r + dy, c + dx
                if rr < 0 or cc < 0 or rr + block > height or cc + block > width:
                    continue
                sad = float(np.abs(gb[rr:rr + block, cc:cc + block] - ref).sum())
                if sad < best_sad:
                    best, best_sad = (dy, dx), sad
            vectors.append(best)
    return np.asarray(vectors, dtype=np.float64).reshape(-1, 2)


def sim_flow(a: np.ndarray, b: np.ndarray, cfg: Optional[MatchConfig] = None) -> float:
    """1 / (1 + 平均光流幅值)，方向相关（a → b）"""
    cfg = cfg or MatchConfig()
    vectors = block_flow(a, b, cfg.flow_block, cfg.flow_search)
    if vectors.size == 0:
        return 1.0
    return float(1.0 / (1.0 + np.hypot(vectors[:, 0], vectors[:, 1]).mean()))


def composite_similarity(a: np.ndarray, b: np.ndarray, cfg: Optional[MatchConfig] = None) -> MatchScore:
    """加权复合相似度"""
    cfg = cfg or MatchConfig()
    _check_pair(a, b)
    geo, pos, ss, flow = sim_geo(a, b, cfg), sim_pos(a, b, cfg), ssim(a, b, cfg), sim_flow(a, b, cfg)
    total = cfg.w_geo * geo + cfg.w_pos * pos + cfg.w_ssim * ss + cfg.w_flow * flow
    return MatchScore(total=total, geo=geo, pos=pos, ssim=ss, flow=flow)
