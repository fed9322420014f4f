"""
规划器API路由
"""
from typing import List, Optional, Tuple

from fastapi import APIRouter, Depends, HTTPException
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel, Field

from agents.planner_agent import PlannerAgent
from models.env import TaskId
from models.errors import PlanValidationError, SpatialPolicyError
from models.plan import SpatialState, Subgoal
from spatialplan import extract_plan_request, generate_plan, parse_plan, serialize_plan

router = APIRouter()

# 全局规划智能体（规则规划器）
planner_agent = PlannerAgent()


class PlanRequest(BaseModel):
    """规划请求模型"""
    p_ee: Tuple[float, float, float] = Field(..., description="末端位置")
    p_obj: Tuple[float, float, float] = Field(..., description="物体位置")
    task: TaskId = Field(..., description="任务类型")


class PlanResponse(BaseModel):
    """规划响应模型"""
    plan_text: str
    delta_p: Tuple[float, float, float]
    subgoals: List[Subgoal]


class ParseRequest(BaseModel):
    """规划文本解析请求"""
    plan_text: str


class OracleRequest(BaseModel):
    """远程规划器协议请求：{prompt, model}"""
    prompt: str
    model: Optional[str] = None


def get_planner() -> PlannerAgent:
    return planner_agent


@router.post("/plan", response_model=PlanResponse, summary="生成空间规划表")
async def create_plan(request: PlanRequest, planner: PlannerAgent = Depends(get_planner)):
    try:
        state = SpatialState.from_positions(request.p_ee, request.p_obj)
        table = await planner.plan(state, request.task)
    except (SpatialPolicyError, ValueError) as e:
        raise HTTPException(status_code=422, detail=str(e))
    return PlanResponse(plan_text=serialize_plan(table), delta_p=state.delta_p, subgoals=table.subgoals)


@router.post("/plan/parse", response_model=PlanResponse, summary="解析规划文本")
async def parse_plan_text(request: ParseRequest):
    try:
        table = parse_plan(request.plan_text)
    except PlanValidationError as e:
        raise HTTPException(status_code=422, detail={"message": str(e), "line_number": getattr(e, "line_number", None)})
    net = tuple(float(c) for c in table.net_displacement)
    return PlanResponse(plan_text=serialize_plan(table), delta_p=net, subgoals=table.subgoals)


@router.post("/oracle", response_class=PlainTextResponse, summary="远程规划器协议（纯文本回复）")
async def oracle(request: OracleRequest):
    """从结构化提示词中取回任务与偏移，返回规则规划器的规划文本"""
    parsed = extract_plan_request(request.prompt)
    if parsed is None:
        raise HTTPException(status_code=422, detail="提示词中缺少 Task / Offset 行")
    task, offset = parsed
    try:
        table = generate_plan(offset, task)
    except SpatialPolicyError as e:
        raise HTTPException(status_code=422, detail=str(e))
    return serialize_plan(table)
