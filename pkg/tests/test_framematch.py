"""
帧匹配测试
"""
import math

import numpy as np
import pytest

from framematch import (
    center_of_mass,
    composite_similarity,
    sim_flow,
    sim_geo,
    sim_pos,
    ssim,
    to_gray,
    tracker_update,
)
from models.errors import ShapeError
from models.matching import GoalTracker, MatchConfig, MatchScore
from models.video import VideoClip


def reference_ssim(a, b, win=7, c1=0.01 ** 2, c2=0.03 ** 2):
    """逐窗口直接计算（总体方差）"""
    h, w = a.shape
    values = []
    for r in range(h - win + 1):
        for c in range(w - win + 1):
            x = a[r:r + win, c:c + win]
            y = b[r:r + win, c:c + win]
            mx, my = x.mean(), y.mean()
            vx, vy = ((x - mx) ** 2).mean(), ((y - my) ** 2).mean()
            cov = ((x - mx) * (y - my)).mean()
            values.append(((2 * mx * my + c1) * (2 * cov + c2)) / ((mx ** 2 + my ** 2 + c1) * (vx + vy + c2)))
    return float(np.mean(values))


def _textured(rng, size=32):
    return rng.random((size, size, 3))


class TestGeo:
    def test_identity(self, rng):
        a = _textured(rng)
        assert sim_geo(a, a) == 1.0

    def test_uniform_frames(self):
        assert sim_geo(np.zeros((16, 16, 3)), np.full((16, 16, 3), 0.7)) == 1.0

    def test_disjoint_edges(self):
        a = np.zeros((32, 32, 3))
        a[:, :8] = 1.0
        b = np.zeros((32, 32, 3))
        b[:, 24:] = 1.0
        assert sim_geo(a, b) == 0.0

    def test_symmetric(self, rng):
        a, b = _textured(rng), _textured(rng)
        assert sim_geo(a, b) == sim_geo(b, a)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            sim_geo(np.zeros((8, 8, 3)), np.zeros((8, 16, 3)))


class TestPos:
    def test_identity(self, rng):
        a = _textured(rng)
        assert sim_pos(a, a) == pytest.approx(1.0, abs=1e-12)

    def test_black_vs_white(self):
        black, white = np.zeros((16, 16, 3)), np.ones((16, 16, 3))
        # 全黑质心取图像中心，与全白质心重合
        assert sim_pos(black, white) == pytest.approx(0.5)

    def test_diagonal_pixel_shift(self):
        a, b = np.zeros((16, 16, 3)), np.zeros((16, 16, 3))
        a[0, 0] = 1.0
        b[15, 15] = 1.0
        ra, ca = center_of_mass(to_gray(a))
        rb, cb = center_of_mass(to_gray(b))
        assert math.hypot(ra - rb, ca - cb) == pytest.approx(math.hypot(15, 15))
        # 4×4 分块中两块各差 1/16，质心得分为 0
        block = 1.0 - 2 * (1 / 16) / 16
        assert sim_pos(a, b) == pytest.approx(0.5 * block)

    def test_symmetric(self, rng):
        a, b = _textured(rng), _textured(rng)
        assert sim_pos(a, b) == pytest.approx(sim_pos(b, a), abs=1e-15)


class TestSSIM:
    def test_identity(self, rng):
        a = _textured(rng)
        assert ssim(a, a) == pytest.approx(1.0, abs=1e-9)

    def test_constant_frames(self):
        a = np.full((16, 16, 3), 0.4)
        assert ssim(a, a.copy()) == pytest.approx(1.0, abs=1e-9)

    def test_matches_direct_computation(self, rng):
        from skimage.metrics import structural_similarity

        for _ in range(5):
            a, b = _textured(rng), _textured(rng)
            ga, gb = to_gray(a), to_gray(b)
            raw = structural_similarity(ga, gb, win_size=7, data_range=1.0,
                                        gaussian_weights=False, use_sample_covariance=False)
            assert raw == pytest.approx(reference_ssim(ga, gb), abs=1e-6)
            assert ssim(a, b) == pytest.approx(min(1.0, max(0.0, reference_ssim(ga, gb))), abs=1e-6)

    def test_symmetric(self, rng):
        a, b = _textured(rng), _textured(rng)
        assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-12)


class TestFlow:
    def test_identity(self, rng):
        a = _textured(rng)
        assert sim_flow(a, a) == 1.0

    def test_global_shift(self, rng):
        a = _textured(rng)
        b = np.roll(a, 2, axis=1)
        assert sim_flow(a, b) == pytest.approx(1 / 3, abs=0.1)

    def test_range(self, rng):
        for _ in range(5):
            v = sim_flow(_textured(rng), _textured(rng))
            assert 0.0 < v <= 1.0


class TestComposite:
    def test_identity(self, rng):
        a = _textured(rng)
        assert composite_similarity(a, a).total == pytest.approx(1.0, abs=1e-6)

    def test_weighted_sum_arithmetic(self):
        cfg = MatchConfig()
        total = sum(w * c for w, c in zip(cfg.weights, (1.0, 1.0, 1.0, 0.0)))
        assert total == pytest.approx(0.9)

    def test_total_is_weighted_sum(self, rng):
        cfg = MatchConfig()
        s = composite_similarity(_textured(rng), _textured(rng), cfg)
        assert s.total == cfg.w_geo * s.geo + cfg.w_pos * s.pos + cfg.w_ssim * s.ssim + cfg.w_flow * s.flow
        assert 0.0 <= s.total <= 1.0

    def test_noise_pairs_dissimilar(self):
        rng = np.random.default_rng(99)
        totals = [composite_similarity(_textured(rng), _textured(rng)).total for _ in range(100)]
        assert np.mean(totals) < 0.5

    def test_bad_weights(self):
        with pytest.raises(ValueError):
            MatchConfig(w_geo=0.5)


def _clip(rng):
    return VideoClip(frames=rng.random((8, 16, 16, 3)).astype(np.float32))


class TestTracker:
    def test_match_advances(self, rng):
        clip = _clip(rng)
        out = tracker_update(GoalTracker(), clip.frames[1], clip)
        assert out.advanced and not out.forced
        assert out.tracker == GoalTracker(goal_index=2, steps_since_switch=0)

    def test_hard_switch(self, rng, mocker):
        clip = _clip(rng)
        low = MatchScore(total=0.1, geo=0.1, pos=0.1, ssim=0.1, flow=0.1)
        mocker.patch("framematch.tracker.composite_similarity", return_value=low)
        tr = GoalTracker()
        for _ in range(27):
            out = tracker_update(tr, clip.frames[0], clip)
            assert not out.advanced
            tr = out.tracker
        assert tr.steps_since_switch == 27
        out = tracker_update(tr, clip.frames[0], clip)
        assert out.advanced and out.forced
        assert out.tracker.goal_index == 2 and out.tracker.steps_since_switch == 0

    def test_cap_at_last_frame(self, rng):
        clip = _clip(rng)
        out = tracker_update(GoalTracker(goal_index=7), clip.frames[7], clip)
        assert out.advanced
        assert out.tracker.goal_index == 7

    def test_liveness(self, rng):
        clip = _clip(rng)
        cfg = MatchConfig(t_max=3)
        tr = GoalTracker()
        for _ in range(7 * cfg.t_max):
            tr = tracker_update(tr, np.zeros((16, 16, 3)), clip, cfg).tracker
        assert tr.goal_index == 7
