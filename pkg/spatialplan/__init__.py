"""
空间规划表模块
"""

from .oracle import EPS_AXIS, TERMINAL_BY_TASK, compute_offset, generate_plan, refine_plan, soundness_bound
from .grammar import HEADER, parse_plan, serialize_plan
from .prompts import render_plan_prompt, render_validation_prompt, extract_plan_request
from .vlm_client import (
    PlanOracleClient, OllamaOracleClient, HttpOracleClient, complete_with_retry, vlm_generate_plan
)

__all__ = [
    "EPS_AXIS", "TERMINAL_BY_TASK", "compute_offset", "generate_plan", "refine_plan", "soundness_bound",
    "HEADER", "parse_plan", "serialize_plan",
    "render_plan_prompt", "render_validation_prompt", "extract_plan_request",
    "PlanOracleClient", "OllamaOracleClient", "HttpOracleClient", "complete_with_retry", "vlm_generate_plan",
]
