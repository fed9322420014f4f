#!/usr/bin/env python3
"""
空间规划视觉运动系统
主程序入口：命令行子命令；serve 子命令启动规划器 HTTP 服务
"""
import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI

from api import router
from harness.cli import entrypoint

logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """应用生命周期管理"""
    logger.info("🚀 启动空间规划服务...")
    yield
    logger.info("✅ 服务已关闭")


def create_app() -> FastAPI:
    """创建FastAPI应用"""
    app = FastAPI(
        title="空间规划视觉运动系统",
        description="空间规划表生成 / 解析，以及兼容远程规划器协议的纯文本接口",
        version="0.1.0",
        lifespan=lifespan
    )

    # 注册路由
    app.include_router(router, prefix="/api/v1")

    return app


app = create_app()


if __name__ == "__main__":
    entrypoint()
