"""
视频智能体：带校验的视频规划生成
"""
import hashlib
import logging
import math
from typing import Any, Dict, List, Optional, Protocol, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from agents.base_agent import AgentMessage, BaseAgent
from config.settings import settings
from envsim.renderer import EE_CHANNEL, OBJECT_CHANNEL, marker_centroid, marker_mask, world_to_pixel
from models.env import TaskId
from models.errors import OracleReplyError, RemoteOracleError
from models.plan import PlanTable
from models.video import VideoClip
from spatialplan.grammar import serialize_plan
from spatialplan.prompts import render_validation_prompt
from spatialplan.vlm_client import PlanOracleClient, complete_with_retry

logger = logging.getLogger(__name__)

ACCEPT = "Accept"
REJECT = "Reject"


def derive_seed(master: int, *parts: Union[int, str]) -> int:
    """由主种子与附加标签派生 32 位子种子"""
    key = ":".join(str(p) for p in (master, *parts))
    return int.from_bytes(hashlib.sha256(key.encode("utf-8")).digest()[:4], "big")


class ValidationVerdict(BaseModel):
    """校验结论"""
    model_config = ConfigDict(frozen=True)

    accepted: bool
    score: float = Field(ge=0.0, le=1.0)
    reason: str = ""


class VideoValidator(Protocol):
    async def validate(self, clip: VideoClip, plan: PlanTable, p_ee: Sequence[float]) -> ValidationVerdict:
        ...


def frame_observations(clip: VideoClip) -> List[Dict[str, Any]]:
    """逐帧统计物体像素数与末端像素质心"""
    observations = []
    for frame in clip.frames:
        centroid = marker_centroid(frame, EE_CHANNEL)
        observations.append({
            "object_pixels": int(marker_mask(frame, OBJECT_CHANNEL).sum()),
            "ee": None if centroid is None else (round(centroid[0], 2), round(centroid[1], 2)),
        })
    return observations


class RuleVideoValidator:
    """规则校验：物体持续存在 + 末端朝规划目标前进"""

    def __init__(self, persistence_ratio: float = 0.5, progress_tolerance_px: float = 1.5):
        self.persistence_ratio = persistence_ratio
        self.progress_tolerance_px = progress_tolerance_px

    def _persistence(self, observations: List[Dict[str, Any]]) -> float:
        base = observations[0]["object_pixels"]
        if base == 0:
            # 首帧被遮挡时无从比较
            return 1.0
        return min(o["object_pixels"] / base for o in observations)

    async def validate(self, clip: VideoClip, plan: PlanTable, p_ee: Sequence[float]) -> ValidationVerdict:
        observations = frame_observations(clip)
        persistence = self._persistence(observations)
        if persistence < self.persistence_ratio:
            return ValidationVerdict(accepted=False, score=0.5 * min(1.0, persistence),
                                     reason=f"物体像素保持率 {persistence:.2f} 低于 {self.persistence_ratio}")

        height, width = clip.resolution
        target = np.asarray(p_ee, dtype=np.float64) + plan.net_displacement
        target_px = world_to_pixel(float(np.clip(target[0], 0.0, 1.0)), float(np.clip(target[1], 0.0, 1.0)),
                                   height, width)
        start, end = observations[0]["ee"], observations[-1]["ee"]
        if start is None:
            return ValidationVerdict(accepted=True, score=0.5 + 0.25 * min(1.0, persistence),
                                     reason="首帧末端不可见，跳过进度检查")
        if end is None:
            return ValidationVerdict(accepted=False, score=0.25 * min(1.0, persistence), reason="末帧末端消失")

        d0 = math.hypot(start[0] - target_px[0], start[1] - target_px[1])
        d7 = math.hypot(end[0] - target_px[0], end[1] - target_px[1])
        diag = math.hypot(height - 1, width - 1)
        progress = float(np.clip(0.5 + 0.5 * (d0 - d7) / diag, 0.0, 1.0))
        score = 0.5 * min(1.0, persistence) + 0.5 * progress
        if d7 < d0 or d7 <= self.progress_tolerance_px:
            return ValidationVerdict(accepted=True, score=score)
        return ValidationVerdict(accepted=False, score=score, reason=f"末端未接近目标 ({d0:.1f}px → {d7:.1f}px)")


def parse_verdict(reply: str) -> bool:
    """只接受字面量 Accept / Reject"""
    text = reply.strip()
    if text == ACCEPT:
        return True
    if text == REJECT:
        return False
    raise OracleReplyError("校验器回复必须是 Accept 或 Reject", reply)


class RemoteVideoValidator:
    """远程校验：发送结构化提示词，回复严格为 Accept / Reject"""

    def __init__(self, client: PlanOracleClient, max_attempts: Optional[int] = None):
        self.client = client
        self.max_attempts = max_attempts or settings.VLM_MAX_ATTEMPTS

    async def validate(self, clip: VideoClip, plan: PlanTable, p_ee: Sequence[float]) -> ValidationVerdict:
        prompt = render_validation_prompt(serialize_plan(plan), frame_observations(clip))
        last_error = ""
        for attempt in range(1, self.max_attempts + 1):
            try:
                reply = await complete_with_retry(self.client, prompt, 1)
                accepted = parse_verdict(reply)
            except (RemoteOracleError, OracleReplyError) as e:
                last_error = str(e)
                logger.warning(f"⚠️ 远程校验失败 (第 {attempt}/{self.max_attempts} 次): {e}")
                continue
            return ValidationVerdict(accepted=accepted, score=1.0 if accepted else 0.0,
                                     reason="" if accepted else "远程校验器拒绝")
        return ValidationVerdict(accepted=False, score=0.0, reason=f"远程校验无有效回复: {last_error}")


class GenerationAttempt(BaseModel):
    """一次生成尝试"""
    attempt: int
    seed: int
    verdict: ValidationVerdict


class GenerationResult(BaseModel):
    """带校验生成的结果；flagged 表示在 R_max 次内未通过校验"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    clip: VideoClip
    accepted: bool
    flagged: bool
    attempts: List[GenerationAttempt]

    @property
    def n_attempts(self) -> int:
        return len(self.attempts)


class VideoAgent(BaseAgent):
    """重复采样直到校验通过，最多 regen_max 次"""

    def __init__(self, model, validator: VideoValidator, regen_max: int = 5, steps: int = 50,
                 guidance_s: float = 2.0):
        if regen_max < 1:
            raise ValueError("regen_max 必须为正整数")
        self.model = model
        self.validator = validator
        self.regen_max = regen_max
        self.steps = steps
        self.guidance_s = guidance_s
        super().__init__(
            agent_id="video",
            name="视频智能体",
            description="以规划表为条件生成 7 帧视频规划并校验",
        )

    def get_capabilities(self) -> List[str]:
        return ["generate_video", "validate_video"]

    async def generate_validated(self, observation: np.ndarray, plan: PlanTable, task_id: Union[TaskId, str],
                                 p_ee: Sequence[float], master_seed: int) -> GenerationResult:
        with self.track():
            attempts: List[GenerationAttempt] = []
            best_clip: Optional[VideoClip] = None
            best_score = -1.0
            for attempt in range(self.regen_max):
                seed = derive_seed(master_seed, attempt)
                clip = self.model.sample(observation, plan, task_id, steps=self.steps,
                                         guidance_s=self.guidance_s, seed=seed)
                verdict = await self.validator.validate(clip, plan, p_ee)
                attempts.append(GenerationAttempt(attempt=attempt, seed=seed, verdict=verdict))
                if verdict.accepted:
                    logger.debug(f"视频第 {attempt + 1} 次生成通过校验")
                    return GenerationResult(clip=clip, accepted=True, flagged=False, attempts=attempts)
                if verdict.score > best_score:
                    best_clip, best_score = clip, verdict.score
            logger.warning(f"⚠️ {self.regen_max} 次生成均未通过校验，返回得分最高的结果 ({best_score:.3f})")
            return GenerationResult(clip=best_clip, accepted=False, flagged=True, attempts=attempts)

    async def handle_message(self, message: AgentMessage) -> Dict[str, Any]:
        raise ValueError(f"视频智能体不接受消息调用: {message.message_type}")
