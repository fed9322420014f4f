"""
系统API路由
"""
from fastapi import APIRouter

from api.routes.planning import planner_agent

router = APIRouter()


@router.get("/health", summary="健康检查")
async def health():
    return {"status": "healthy", "planner": planner_agent.get_status()}
