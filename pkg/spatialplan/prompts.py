"""
远程规划器 / 视频校验器的结构化提示词模板
"""
import re
from typing import Optional, Sequence, Tuple

from jinja2 import Template

from models.plan import ACTION_VOCABULARY

PLAN_PROMPT = Template("""\
You are a spatial planner for a robot arm. Decompose the offset between the
end effector and the target object into a short sequence of atomic subgoals.

Direction sign semantics:
x: right-/left+, y: up+/down-, z: forward-/back+

Rules:
- Allowed actions: {{ actions | join(", ") }}.
- Each line is: <index>. <action> [dx, dy, dz] [<distance>]
- dx, dy, dz are each -1, 0 or 1; distance is a non-negative float in meters with two decimals.
- Terminal actions ({{ terminals | join(", ") }}) use [0, 0, 0] [0.00] and must be last.
- Use at most {{ n_max }} lines. Respond with the plan block only.

Example:
Plan:
1. move [-1, 0, 0] [0.19]
2. move [0, 0, -1] [0.21]
3. push [0, 0, 0] [0.00]

Task: {{ task }}
Offset: [{{ "%.6f" | format(offset[0]) }}, {{ "%.6f" | format(offset[1]) }}, {{ "%.6f" | format(offset[2]) }}]
""")

VALIDATION_PROMPT = Template("""\
You are checking a generated robot video against its spatial plan.

Plan:
{{ plan_lines }}

Frame observations (object pixel count, end-effector pixel position):
{% for obs in observations -%}
frame {{ loop.index0 }}: object_pixels={{ obs.object_pixels }}, ee={{ obs.ee if obs.ee is not none else "missing" }}
{% endfor %}
Reject the video if the object disappears or the end effector does not make
progress toward the plan target. Answer with exactly one word: Accept or Reject.
""")

_TASK_RE = re.compile(r"^\s*Task:\s*(?P<task>\S+)\s*$", re.MULTILINE)
_OFFSET_RE = re.compile(r"^\s*Offset:\s*\[(?P<values>[^\]]*)\]\s*$", re.MULTILINE)


def render_plan_prompt(offset: Sequence[float], task: str, n_max: int = 8) -> str:
    """构造规划提示词"""
    terminals = [a.value for a in ACTION_VOCABULARY if a.is_terminal]
    return PLAN_PROMPT.render(
        actions=[a.value for a in ACTION_VOCABULARY],
        terminals=terminals,
        n_max=n_max,
        task=task,
        offset=[float(c) for c in offset],
    )


def render_validation_prompt(plan_text: str, observations: Sequence[dict]) -> str:
    """构造视频校验提示词"""
    plan_lines = "\n".join(line for line in plan_text.splitlines() if line.strip() and not line.startswith("Plan:"))
    return VALIDATION_PROMPT.render(plan_lines=plan_lines, observations=observations)


def extract_plan_request(prompt: str) -> Optional[Tuple[str, Tuple[float, float, float]]]:
    """从规划提示词中取回任务与偏移，无法识别时返回 None"""
    task_match = _TASK_RE.search(prompt)
    offset_match = _OFFSET_RE.search(prompt)
    if task_match is None or offset_match is None:
        return None
    try:
        values = tuple(float(v) for v in offset_match.group("values").split(","))
    except ValueError:
        return None
    if len(values) != 3:
        return None
    return task_match.group("task"), values
