"""
视频扩散模块
"""
from .ema import EMAModel
from .masking import mask_input
from .model import (
    N_FUTURE,
    VideoBatch,
    VideoDiffusionModel,
    VideoModelConfig,
    VideoSample,
    build_video_model,
    collate_video,
    frames_to_tensor,
    tensor_to_frames,
)
from .sampling import ddim_sample_loop, guided_eps, predict_x0
from .schedule import DiffusionSchedule, cosine_interpolated_schedule, linear_beta_schedule, q_sample
from .trainer import DiffusionTrainer, TrainingConfig, TrainingResult, evaluate_loss, warmup_cosine
from .unet import FiLM, FiLMUNet2D, SinusoidalPosEmb

__all__ = [
    # 调度
    "DiffusionSchedule",
    "linear_beta_schedule",
    "cosine_interpolated_schedule",
    "q_sample",
    # 采样
    "ddim_sample_loop",
    "guided_eps",
    "predict_x0",
    # 网络
    "FiLM",
    "FiLMUNet2D",
    "SinusoidalPosEmb",
    "N_FUTURE",
    "VideoBatch",
    "VideoDiffusionModel",
    "VideoModelConfig",
    "VideoSample",
    "build_video_model",
    "collate_video",
    "frames_to_tensor",
    "tensor_to_frames",
    # 训练
    "EMAModel",
    "DiffusionTrainer",
    "TrainingConfig",
    "TrainingResult",
    "evaluate_loss",
    "warmup_cosine",
    # 鲁棒性
    "mask_input",
]
