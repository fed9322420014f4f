"""
异常层次
"""
from typing import Optional


class SpatialPolicyError(Exception):
    """系统异常基类"""


class ConfigurationError(SpatialPolicyError, ValueError):
    """配置错误：未知任务、非法参数范围、缺失检查点等"""


class ConfigMismatchError(ConfigurationError):
    """配置哈希与检查点不一致"""


class DataMismatchError(ConfigurationError):
    """数据集与运行配置不一致（分辨率、任务集合）"""


class EpisodeExhaustedError(SpatialPolicyError, RuntimeError):
    """回合步数已用尽"""


class ShapeError(SpatialPolicyError, ValueError):
    """张量 / 图像形状不匹配"""


class VocabularyError(SpatialPolicyError, ValueError):
    """未知的动作类型或任务符号"""


class CapacityError(SpatialPolicyError, ValueError):
    """子目标数量超过 N_max"""


class RangeError(SpatialPolicyError, ValueError):
    """数值超出允许范围"""


class PlanValidationError(SpatialPolicyError, ValueError):
    """规划表不合法"""


class PlanParseError(PlanValidationError):
    """规划文本语法错误"""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"第 {line_number} 行: {message}"
        super().__init__(message)


class PlanRangeError(PlanValidationError, RangeError):
    """规划文本中方向分量或距离越界"""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"第 {line_number} 行: {message}"
        super().__init__(message)


class OracleReplyError(PlanValidationError):
    """远程规划器 / 校验器返回无法解析的回复"""

    def __init__(self, message: str, raw_reply: str):
        self.raw_reply = raw_reply
        super().__init__(f"{message}; 原始回复: {raw_reply!r}")


class RemoteOracleError(SpatialPolicyError, RuntimeError):
    """远程规划器调用失败"""


class OracleTransportError(RemoteOracleError):
    """远程调用传输层失败（可重试）"""


class ArchiveFormatError(SpatialPolicyError, ValueError):
    """轨迹归档格式错误：版本、截断、校验和"""


class FrameFormatError(SpatialPolicyError, ValueError):
    """图像帧无法读取或形状不合法"""


class TrainingDivergedError(SpatialPolicyError, RuntimeError):
    """训练损失出现非有限值"""


class CheckpointError(SpatialPolicyError, RuntimeError):
    """检查点读写错误"""


class CheckpointVersionError(CheckpointError):
    """检查点版本不受支持"""
