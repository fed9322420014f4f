"""
API路由模块
"""

from .planning import router as planning_router
from .system import router as system_router

__all__ = [
    "planning_router",
    "system_router",
]
