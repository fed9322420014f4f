"""
目标帧跟踪器
"""
import logging
from typing import Optional

import numpy as np

from framematch.metrics import composite_similarity
from models.matching import N_FUTURE_FRAMES, GoalTracker, MatchConfig, TrackerUpdate
from models.video import VideoClip

logger = logging.getLogger(__name__)


def tracker_update(tracker: GoalTracker, current: np.ndarray, plan: VideoClip,
                   cfg: Optional[MatchConfig] = None) -> TrackerUpdate:
    """匹配达到阈值或计数达到 t_max 时前进到下一目标帧（上限为第 7 帧）"""
    cfg = cfg or MatchConfig()
    score = composite_similarity(current, plan.frame(tracker.goal_index), cfg)
    matched = score.total >= cfg.tau
    counter = tracker.steps_since_switch + 1
    forced = not matched and counter >= cfg.t_max
    if matched or forced:
        nxt = GoalTracker(goal_index=min(N_FUTURE_FRAMES, tracker.goal_index + 1), steps_since_switch=0)
        if forced:
            logger.debug(f"目标帧 {tracker.goal_index} 超时，强制切换")
        return TrackerUpdate(tracker=nxt, advanced=True, forced=forced, score=score)
    return TrackerUpdate(
        tracker=tracker.model_copy(update={"steps_since_switch": counter}),
        advanced=False,
        score=score,
    )
