"""
远程规划器配置和连接管理
"""
import asyncio
import logging
from typing import Any, Dict, Optional

from config.settings import settings
from spatialplan.vlm_client import HttpOracleClient, OllamaOracleClient, PlanOracleClient

logger = logging.getLogger(__name__)


class VLMManager:
    """远程规划器管理器"""

    def __init__(self):
        self.client: Optional[PlanOracleClient] = None
        self.backend: Optional[str] = None
        self._initialized = False

    def initialize(self, backend: Optional[str] = None) -> bool:
        """按配置创建规划器客户端"""
        backend = (backend or settings.VLM_BACKEND).lower()
        try:
            logger.info(f"正在创建远程规划器客户端: {backend} @ {settings.VLM_BASE_URL}")
            if backend == "ollama":
                self.client = OllamaOracleClient()
            elif backend == "http":
                self.client = HttpOracleClient()
            else:
                raise ValueError(f"未知的规划器后端: {backend}")
            self.backend = backend
            self._initialized = True
            logger.info("✅ 远程规划器客户端创建成功")
            return True
        except Exception as e:
            logger.error(f"❌ 远程规划器客户端创建失败: {str(e)}")
            return False

    def get_client(self) -> PlanOracleClient:
        """获取规划器客户端"""
        if not self._initialized or self.client is None:
            raise RuntimeError("远程规划器尚未初始化")
        return self.client

    async def health_check(self) -> Dict[str, Any]:
        """健康检查"""
        if not self._initialized:
            return {"status": "error", "message": "未初始化"}
        try:
            start_time = asyncio.get_event_loop().time()
            reply = await self.client.complete("ping")
            end_time = asyncio.get_event_loop().time()
            return {
                "status": "healthy",
                "backend": self.backend,
                "model": settings.VLM_MODEL,
                "base_url": settings.VLM_BASE_URL,
                "response_time": round(end_time - start_time, 3),
                "response_length": len(reply),
            }
        except Exception as e:
            return {"status": "error", "message": str(e)}


# 全局规划器管理器实例
vlm_manager = VLMManager()
