"""
评估指标聚合与报告输出
"""
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import pandas as pd
import plotly.graph_objects as go

from models.report import EpisodeReport, MetricsReport, TaskMetrics

logger = logging.getLogger(__name__)


def episodes_frame(reports: Sequence[EpisodeReport]) -> pd.DataFrame:
    """每回合一行"""
    return pd.DataFrame(
        [
            {
                "task_id": r.task_id.value,
                "seed": r.seed,
                "success": r.success,
                "steps": r.steps,
                "replans": r.replans,
                "regenerations": r.regenerations,
                "flagged": r.flagged_generations,
            }
            for r in reports
        ],
        columns=["task_id", "seed", "success", "steps", "replans", "regenerations", "flagged"],
    )


def aggregate_reports(reports: Sequence[EpisodeReport], config_hash: str,
                      loss_curves: Optional[Dict[str, List[float]]] = None,
                      wall_clock_seconds: Optional[float] = None) -> MetricsReport:
    """按任务聚合成功率、平均步数与重规划次数"""
    df = episodes_frame(reports)
    per_task: List[TaskMetrics] = []
    if not df.empty:
        grouped = df.groupby("task_id", sort=True).agg(
            episodes=("success", "size"),
            success_rate=("success", "mean"),
            mean_steps=("steps", "mean"),
            mean_replans=("replans", "mean"),
            mean_regenerations=("regenerations", "mean"),
        )
        for task_id, row in grouped.iterrows():
            per_task.append(TaskMetrics(
                task_id=task_id,
                episodes=int(row["episodes"]),
                success_rate=float(row["success_rate"]),
                mean_steps=float(row["mean_steps"]),
                mean_replans=float(row["mean_replans"]),
                mean_regenerations=float(row["mean_regenerations"]),
            ))
    return MetricsReport(
        config_hash=config_hash,
        n_episodes=len(reports),
        per_task=per_task,
        loss_curves=dict(loss_curves or {}),
        wall_clock_seconds=wall_clock_seconds,
    )


def write_episode_logs(reports: Sequence[EpisodeReport], out_dir: Union[str, Path]) -> Path:
    """episodes.jsonl（一行一个回合报告）+ 每回合事件日志"""
    out_dir = Path(out_dir)
    events_dir = out_dir / "events"
    events_dir.mkdir(parents=True, exist_ok=True)
    summary = out_dir / "episodes.jsonl"
    with summary.open("w", encoding="utf-8") as f:
        for r in reports:
            f.write(r.model_dump_json(exclude={"events"}) + "\n")
            (events_dir / f"{r.task_id.value}_{r.seed:05d}.jsonl").write_text(r.to_jsonl(), encoding="utf-8")
    return summary


def write_metrics_report(report: MetricsReport, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = report.model_dump(mode="json")
    payload["overall_success_rate"] = report.overall_success_rate
    path.write_text(json.dumps(payload, indent=2, ensure_ascii=False), encoding="utf-8")
    logger.info(f"✅ 评估报告已写入 {path}")
    return path


def loss_curve_figure(loss_curves: Dict[str, List[float]]) -> go.Figure:
    """训练损失曲线"""
    fig = go.Figure()
    for name, values in sorted(loss_curves.items()):
        fig.add_trace(go.Scatter(
            x=list(range(1, len(values) + 1)),
            y=values,
            mode="lines",
            name=name,
        ))
    fig.update_layout(title="训练损失曲线", xaxis_title="step", yaxis_title="loss", yaxis_type="log")
    return fig


def write_loss_chart(loss_curves: Dict[str, List[float]], path: Union[str, Path]) -> Optional[Path]:
    if not any(loss_curves.values()):
        logger.warning("⚠️ 没有可绘制的损失曲线")
        return None
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    loss_curve_figure(loss_curves).write_html(str(path), include_plotlyjs="cdn")
    return path
