"""
数据模型模块
"""

from .env import (
    TaskId, GoalRegion, TaskSpec, EnvState, Action,
    DELTA_MAX, GRASP_RADIUS, CONTACT_RADIUS, DEFAULT_GOAL_RADIUS, DEFAULT_RESOLUTION
)
from .plan import (
    ActionType, SpatialState, Subgoal, PlanTable,
    ACTION_VOCABULARY, TERMINAL_ACTIONS, N_MAX
)
from .trajectory import (
    TrajectoryRecord, SegmentationParams, ManifestEntry, DatasetManifest
)
from .matching import (
    MatchConfig, MatchScore, GoalTracker, TrackerUpdate, N_FUTURE_FRAMES
)
from .report import (
    EventKind, EpisodeEvent, EpisodeReport, TaskMetrics, MetricsReport
)

__all__ = [
    # Environment models
    "TaskId", "GoalRegion", "TaskSpec", "EnvState", "Action",
    "DELTA_MAX", "GRASP_RADIUS", "CONTACT_RADIUS", "DEFAULT_GOAL_RADIUS", "DEFAULT_RESOLUTION",

    # Plan models
    "ActionType", "SpatialState", "Subgoal", "PlanTable",
    "ACTION_VOCABULARY", "TERMINAL_ACTIONS", "N_MAX",

    # Trajectory models
    "TrajectoryRecord", "SegmentationParams", "ManifestEntry", "DatasetManifest",

    # Matching models
    "MatchConfig", "MatchScore", "GoalTracker", "TrackerUpdate", "N_FUTURE_FRAMES",

    # Report models
    "EventKind", "EpisodeEvent", "EpisodeReport", "TaskMetrics", "MetricsReport",
]
