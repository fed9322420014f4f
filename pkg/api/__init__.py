"""
API路由主文件
"""
from fastapi import APIRouter

from .routes import planning_router, system_router

router = APIRouter()

# 注册各模块路由
router.include_router(system_router, tags=["系统管理"])
router.include_router(planning_router, tags=["空间规划"])


@router.get("/", summary="API根路径")
async def root():
    """API根路径"""
    return {
        "message": "空间规划视觉运动系统 API",
        "version": "0.1.0",
        "documentation": "/docs"
    }
