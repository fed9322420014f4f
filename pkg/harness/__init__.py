"""
运行支撑模块：检查点、指标、服务与命令行
"""

from .checkpoints import (
    CHECKPOINT_VERSION, Checkpoint, ModelKind, build_model, check_architecture, check_resume,
    load_checkpoint, save_checkpoint,
)
from .metrics import (
    aggregate_reports, episodes_frame, loss_curve_figure, write_episode_logs, write_loss_chart,
    write_metrics_report,
)

__all__ = [
    # 检查点
    "CHECKPOINT_VERSION",
    "Checkpoint",
    "ModelKind",
    "build_model",
    "check_architecture",
    "check_resume",
    "load_checkpoint",
    "save_checkpoint",
    # 指标
    "aggregate_reports",
    "episodes_frame",
    "loss_curve_figure",
    "write_episode_logs",
    "write_loss_chart",
    "write_metrics_report",
]
