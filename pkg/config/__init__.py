"""
配置模块
"""

from .settings import settings, Settings
from .run_config import (
    RunConfig, EnvSection, DataSection, VideoSection, PolicySection, PipelineSection,
    load_run_config, parse_run_config, dump_run_config, config_hash
)

__all__ = [
    "settings",
    "Settings",
    "RunConfig",
    "EnvSection",
    "DataSection",
    "VideoSection",
    "PolicySection",
    "PipelineSection",
    "load_run_config",
    "parse_run_config",
    "dump_run_config",
    "config_hash",
]
