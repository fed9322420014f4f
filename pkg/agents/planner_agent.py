"""
规划智能体：空间状态 → 规划表
"""
import logging
from typing import Any, Dict, List, Optional

from agents.base_agent import AgentMessage, BaseAgent
from models.env import TaskId
from models.errors import OracleReplyError, RemoteOracleError
from models.plan import PlanTable, SpatialState
from spatialplan.grammar import serialize_plan
from spatialplan.oracle import generate_plan, refine_plan
from spatialplan.vlm_client import PlanOracleClient, vlm_generate_plan

logger = logging.getLogger(__name__)


class PlannerAgent(BaseAgent):
    """规则规划器为默认实现；配置远程客户端时优先调用远程规划器"""

    def __init__(self, client: Optional[PlanOracleClient] = None, max_attempts: Optional[int] = None,
                 fallback_to_rules: bool = True):
        self.client = client
        self.max_attempts = max_attempts
        self.fallback_to_rules = fallback_to_rules
        super().__init__(
            agent_id="planner",
            name="规划智能体",
            description="根据末端与物体的相对偏移生成空间规划表",
        )

    def get_capabilities(self) -> List[str]:
        return ["plan", "refine_plan"]

    async def plan(self, state: SpatialState, task_id: TaskId) -> PlanTable:
        with self.track():
            if self.client is None:
                return generate_plan(state.delta_p, task_id)
            try:
                return await vlm_generate_plan(self.client, state.delta_p, task_id, self.max_attempts)
            except (RemoteOracleError, OracleReplyError) as e:
                if not self.fallback_to_rules:
                    raise
                logger.warning(f"⚠️ 远程规划失败，改用规则规划器: {e}")
                return generate_plan(state.delta_p, task_id)

    async def refine(self, old: PlanTable, state: SpatialState, task_id: TaskId) -> PlanTable:
        """重规划第一阶段"""
        with self.track():
            if self.client is None:
                return refine_plan(old, state, task_id)
        return await self.plan(state, task_id)

    async def handle_message(self, message: AgentMessage) -> Dict[str, Any]:
        content = message.content
        state = SpatialState.from_positions(content["p_ee"], content["p_obj"])
        task_id = TaskId.parse(content["task"])
        if message.message_type != "plan":
            raise ValueError(f"不支持的消息类型: {message.message_type}")
        table = await self.plan(state, task_id)
        return {"plan_text": serialize_plan(table), "subgoals": [g.model_dump(mode="json") for g in table.subgoals]}
