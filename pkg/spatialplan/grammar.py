"""
规划表文本语法：解析与规范序列化

    Plan:
    1. move [-1, 0, 0] [0.19]
    2. move [0, 0, -1] [0.21]
    3. push [0, 0, 0] [0.00]
"""
import math
import re
from typing import List

from pydantic import ValidationError

from models.plan import N_MAX, ActionType, PlanTable, Subgoal
from models.errors import PlanParseError, PlanRangeError, PlanValidationError

HEADER = "Plan:"

_HEADER_RE = re.compile(r"^\s*plan\s*:\s*$", re.IGNORECASE)
_LINE_RE = re.compile(
    r"^\s*(?P<index>\d+)\s*\.\s*(?P<action>[A-Za-z_]+)\s*"
    r"\[(?P<direction>[^\[\]]*)\]\s*"
    r"\[(?P<distance>[^\[\]]*)\]\s*$"
)
_NUMBER_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


def _parse_number(token: str, what: str, line_number: int) -> float:
    token = token.strip()
    if not _NUMBER_RE.match(token):
        raise PlanParseError(f"{what} 不是数字: {token!r}", line_number)
    return float(token)


def _parse_line(line: str, line_number: int) -> tuple:
    match = _LINE_RE.match(line)
    if match is None:
        raise PlanParseError(f"无法识别的规划行: {line.strip()!r}", line_number)

    action_symbol = match.group("action").lower()
    try:
        action_type = ActionType(action_symbol)
    except ValueError:
        raise PlanParseError(f"未知动作类型: {action_symbol!r}", line_number) from None

    components = match.group("direction").split(",")
    if len(components) != 3:
        raise PlanParseError(f"方向向量需要 3 个分量，实际 {len(components)} 个", line_number)
    direction = []
    for token in components:
        value = _parse_number(token, "方向分量", line_number)
        if value not in (-1.0, 0.0, 1.0):
            raise PlanRangeError(f"方向分量必须属于 {{-1, 0, 1}}: {token.strip()}", line_number)
        direction.append(int(value))

    distance = _parse_number(match.group("distance"), "距离", line_number)
    if not math.isfinite(distance) or distance < 0:
        raise PlanRangeError(f"距离必须为非负有限数: {distance}", line_number)

    try:
        subgoal = Subgoal(action_type=action_type, direction=tuple(direction), distance=distance)
    except ValidationError as e:
        raise PlanValidationError(f"第 {line_number} 行子目标不合法: {e.errors()[0]['msg']}") from e
    return int(match.group("index")), subgoal


def parse_plan(text: str) -> PlanTable:
    """解析规划文本（允许可选的 "Plan:" 标题行，空行忽略）"""
    if text is None or not text.strip():
        raise PlanParseError("规划文本为空")

    subgoals: List[Subgoal] = []
    seen_header = False
    for line_number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if _HEADER_RE.match(line):
            if seen_header or subgoals:
                raise PlanParseError("标题行重复或位置错误", line_number)
            seen_header = True
            continue
        index, subgoal = _parse_line(line, line_number)
        if index != len(subgoals) + 1:
            raise PlanParseError(f"序号应为 {len(subgoals) + 1}，实际为 {index}", line_number)
        subgoals.append(subgoal)

    if not subgoals:
        raise PlanParseError("规划文本中没有子目标")
    if len(subgoals) > N_MAX:
        raise PlanValidationError(f"子目标数量 {len(subgoals)} 超过上限 {N_MAX}")
    try:
        return PlanTable(subgoals=tuple(subgoals))
    except ValidationError as e:
        raise PlanValidationError(f"规划表不合法: {e.errors()[0]['msg']}") from e


def format_subgoal(index: int, subgoal: Subgoal) -> str:
    dx, dy, dz = subgoal.direction
    return f"{index}. {subgoal.action_type.value} [{dx}, {dy}, {dz}] [{subgoal.distance + 0.0:.2f}]"


def serialize_plan(plan: PlanTable) -> str:
    """规范文本：标题行 + 从 1 开始编号的子目标行，距离保留两位小数"""
    lines = [HEADER]
    lines.extend(format_subgoal(i, g) for i, g in enumerate(plan.subgoals, start=1))
    return "\n".join(lines)
