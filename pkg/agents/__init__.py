"""
智能体模块
"""

from .base_agent import BaseAgent, AgentMessage, AgentResponse
from .planner_agent import PlannerAgent
from .video_agent import (
    GenerationAttempt,
    GenerationResult,
    RemoteVideoValidator,
    RuleVideoValidator,
    ValidationVerdict,
    VideoAgent,
    derive_seed,
    frame_observations,
    parse_verdict,
)
from .policy_agent import PolicyAgent, is_stuck
from .agent_manager import AgentManager, EventLog

__all__ = [
    "BaseAgent",
    "AgentMessage",
    "AgentResponse",
    "PlannerAgent",
    "GenerationAttempt",
    "GenerationResult",
    "RemoteVideoValidator",
    "RuleVideoValidator",
    "ValidationVerdict",
    "VideoAgent",
    "derive_seed",
    "frame_observations",
    "parse_verdict",
    "PolicyAgent",
    "is_stuck",
    "AgentManager",
    "EventLog",
]
