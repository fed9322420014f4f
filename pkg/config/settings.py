"""
系统配置模块
"""
from typing import Optional
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """系统配置（环境变量 / .env）"""

    # 基础配置
    DEBUG: bool = Field(default=False, description="调试模式")
    HOST: str = Field(default="0.0.0.0", description="服务监听地址")
    PORT: int = Field(default=8000, description="服务端口")

    # 运行目录与随机种子
    RUN_ROOT: str = Field(default="./runs", description="运行产物根目录")
    SEED: Optional[int] = Field(default=None, description="全局随机种子（覆盖配置文件）")
    DEVICE: str = Field(default="cpu", description="torch 设备")

    # 远程规划器 / 校验器配置
    VLM_BACKEND: str = Field(default="ollama", description="ollama 或 http")
    VLM_BASE_URL: str = Field(default="http://localhost:11434")
    VLM_MODEL: str = Field(default="qwen3:4b")
    VLM_TIMEOUT: float = Field(default=120.0)
    VLM_MAX_ATTEMPTS: int = Field(default=3, ge=1, description="远程调用总尝试次数")

    # 日志配置
    LOG_LEVEL: str = Field(default="INFO")

    model_config = SettingsConfigDict(env_file=".env", case_sensitive=True, extra="ignore")


# 全局配置实例
settings = Settings()
