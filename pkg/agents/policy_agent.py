"""
策略智能体：当前帧 + 目标帧 + 坐标 → H 步动作
"""
import logging
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy.spatial.distance import pdist

from agents.base_agent import AgentMessage, BaseAgent
from models.env import Action

logger = logging.getLogger(__name__)


def is_stuck(ee_history: Sequence[Sequence[float]], succeeded: bool, window: int = 24,
             delta: float = 0.01) -> bool:
    """最近 window 步内末端两两位移的最大值小于 delta 时判定为停滞"""
    if succeeded or len(ee_history) < window:
        return False
    recent = np.asarray(ee_history[-window:], dtype=np.float64)
    return bool(pdist(recent).max() < delta)


class PolicyAgent(BaseAgent):
    """扩散动作策略的封装"""

    def __init__(self, policy, steps: int = 10, guidance_s: float = 1.0):
        self.policy = policy
        self.steps = steps
        self.guidance_s = guidance_s
        super().__init__(
            agent_id="policy",
            name="策略智能体",
            description="以当前帧、目标帧和末端坐标为条件采样动作序列",
        )

    def get_capabilities(self) -> List[str]:
        return ["sample_actions"]

    @property
    def uses_object_coordinate(self) -> bool:
        return bool(self.policy.config.coord_with_object)

    def propose(self, current: np.ndarray, goal: np.ndarray, p_ee: Sequence[float],
                p_obj: Optional[Sequence[float]], seed: int) -> List[Action]:
        with self.track():
            p_obj = np.asarray(p_obj, dtype=np.float64) if self.uses_object_coordinate else None
            return self.policy.act(current, goal, np.asarray(p_ee, dtype=np.float64), p_obj,
                                   steps=self.steps, guidance_s=self.guidance_s, seed=seed)

    async def handle_message(self, message: AgentMessage) -> Dict[str, Any]:
        if message.message_type != "sample_actions":
            raise ValueError(f"不支持的消息类型: {message.message_type}")
        content = message.content
        actions = self.propose(
            np.asarray(content["current"], dtype=np.float32),
            np.asarray(content["goal"], dtype=np.float32),
            content["p_ee"],
            content.get("p_obj"),
            int(content.get("seed", 0)),
        )
        return {"actions": [a.model_dump(mode="json") for a in actions]}
