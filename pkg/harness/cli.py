"""
命令行入口
"""
import argparse
import asyncio
import logging
import math
import sys
from pathlib import Path
from typing import Optional, Sequence, Tuple

from config.run_config import RunConfig, dump_run_config, load_run_config
from config.settings import settings
from models.env import TaskId
from models.errors import SpatialPolicyError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1


def parse_vector(text: str) -> Tuple[float, float, float]:
    """"x,y,z" → 三维向量"""
    parts = [p for p in text.replace(" ", "").strip("[]()").split(",") if p]
    try:
        values = tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"无法解析的向量: {text!r}")
    if len(values) != 3 or not all(math.isfinite(v) for v in values):
        raise argparse.ArgumentTypeError(f"向量必须是 3 个有限数值: {text!r}")
    return values


def parse_stall(text: str) -> Tuple[int, int]:
    """"start,duration" → 冻结区间"""
    try:
        start, duration = (int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"停滞区间格式应为 start,duration: {text!r}")
    if start < 0 or duration < 1:
        raise argparse.ArgumentTypeError(f"停滞区间不合法: {text!r}")
    return start, duration


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spatial-planner", description="空间规划条件的视觉运动策略")
    parser.add_argument("--config", type=Path, default=None, help="运行配置 JSON 文件")
    parser.add_argument("--seed", type=int, default=None, help="覆盖配置中的全局种子（亦可用环境变量 SEED）")
    parser.add_argument("--run-root", type=Path, default=None, help="运行产物根目录")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="录制专家轨迹并写出归档与清单")
    p.add_argument("--out", type=Path, default=None)

    for name, help_text in (("train-video", "训练视频扩散模型"), ("train-policy", "训练扩散动作策略")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--data", type=Path, default=None)
        p.add_argument("--out", type=Path, default=None)
        group = p.add_mutually_exclusive_group()
        group.add_argument("--resume", type=Path, default=None, help="从检查点续训（要求配置哈希一致）")
        group.add_argument("--init-from", type=Path, default=None, help="从检查点初始化权重后微调")

    for name, help_text in (("eval", "多回合闭环评估"), ("rollout", "单回合闭环推理并写出事件日志")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--video-ckpt", type=Path, default=None)
        p.add_argument("--policy-ckpt", type=Path, default=None)
        p.add_argument("--out", type=Path, default=None)
        p.add_argument("--mask-ratio", type=float, default=None, help="输入遮挡比例")
        p.add_argument("--remote-planner", action="store_true", help="使用远程规划器 / 校验器客户端")
        if name == "eval":
            p.add_argument("--episodes", type=int, default=25, help="每个任务的回合数")
        else:
            p.add_argument("--task", type=str, required=True, choices=[t.value for t in TaskId])
            p.add_argument("--episode-seed", type=int, default=0)
            p.add_argument("--stall", type=parse_stall, default=None, help="冻结末端 start,duration")

    p = sub.add_parser("plan", help="打印规则规划器输出的规划表")
    p.add_argument("--ee", type=parse_vector, required=True)
    p.add_argument("--obj", type=parse_vector, required=True)
    p.add_argument("--task", type=str, required=True, choices=[t.value for t in TaskId])

    p = sub.add_parser("match", help="打印两帧的复合相似度分解")
    p.add_argument("frame_a", type=Path)
    p.add_argument("frame_b", type=Path)

    sub.add_parser("show-config", help="打印规范化后的运行配置")

    p = sub.add_parser("serve", help="启动规划器 HTTP 服务")
    p.add_argument("--host", type=str, default=None)
    p.add_argument("--port", type=int, default=None)
    return parser


def _checkpoints(args, run_dir: Path) -> Tuple[Path, Path]:
    video = args.video_ckpt or run_dir / "checkpoints" / "video.pt"
    policy = args.policy_ckpt or run_dir / "checkpoints" / "policy.pt"
    return video, policy


def _planner_client(enabled: bool):
    if not enabled:
        return None
    from config.vlm_config import vlm_manager

    if not vlm_manager.initialize():
        raise SpatialPolicyError("远程规划器客户端创建失败")
    return vlm_manager.get_client()


def _run(args, cfg: RunConfig) -> int:
    from harness import services

    command = args.command
    if command == "plan":
        print(services.plan_text(args.ee, args.obj, args.task))
        return EXIT_OK
    if command == "match":
        score = services.match_frames(args.frame_a, args.frame_b, cfg.pipeline.match)
        m = cfg.pipeline.match
        print(f"geo   {score.geo:.6f}  (w={m.w_geo})")
        print(f"pos   {score.pos:.6f}  (w={m.w_pos})")
        print(f"ssim  {score.ssim:.6f}  (w={m.w_ssim})")
        print(f"flow  {score.flow:.6f}  (w={m.w_flow})")
        print(f"total {score.total:.6f}  tau={m.tau}  {'matched' if score.total >= m.tau else 'not matched'}")
        return EXIT_OK
    if command == "show-config":
        print(dump_run_config(cfg))
        return EXIT_OK
    if command == "serve":
        import uvicorn

        uvicorn.run("main:app", host=args.host or settings.HOST, port=args.port or settings.PORT,
                    log_level=settings.LOG_LEVEL.lower(), reload=settings.DEBUG)
        return EXIT_OK

    run_dir = services.run_directory(cfg, args.run_root)
    if command == "gen-data":
        manifest = services.gen_data(cfg, args.out or run_dir / "data")
        print(f"{len(manifest.entries)} episodes → {args.out or run_dir / 'data'}")
        return EXIT_OK
    if command in ("train-video", "train-policy"):
        data_dir = args.data or run_dir / "data"
        kind = command.split("-", 1)[1]
        out = args.out or run_dir / "checkpoints" / f"{kind}.pt"
        train = services.train_video if kind == "video" else services.train_policy
        result = train(cfg, data_dir, out, resume=args.resume, init_from=args.init_from)
        print(f"{kind}: {result.steps} steps, final loss {result.loss_history[-1]:.5f}, val loss {result.val_loss}")
        return EXIT_OK

    video_ckpt, policy_ckpt = _checkpoints(args, run_dir)
    client = _planner_client(args.remote_planner)
    if command == "eval":
        out = args.out or run_dir / "eval"
        report = asyncio.run(services.evaluate(cfg, video_ckpt, policy_ckpt, args.episodes, out,
                                               args.mask_ratio, client))
        print(report.model_dump_json(exclude={"loss_curves"}, indent=2))
        return EXIT_OK
    if command == "rollout":
        out = args.out or run_dir / "rollouts"
        report = asyncio.run(services.rollout(cfg, video_ckpt, policy_ckpt, args.task, args.episode_seed, out,
                                              args.mask_ratio, args.stall, client))
        sys.stdout.write(report.to_jsonl())
        return EXIT_OK
    raise AssertionError(command)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    if args.command == "eval" and args.episodes < 1:
        parser.error("--episodes 必须为正整数")
    if getattr(args, "mask_ratio", None) is not None and not 0.0 <= args.mask_ratio < 1.0:
        parser.error("--mask-ratio 必须位于 [0, 1)")
    try:
        cfg = load_run_config(args.config, args.seed)
        return _run(args, cfg)
    except (SpatialPolicyError, OSError) as e:
        logger.error(f"❌ {args.command} 失败: {e}")
        return EXIT_FAILURE


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
