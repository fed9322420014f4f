"""
智能体管理器
负责协调规划、视频与策略智能体，执行闭环推理回合
"""
import asyncio
import logging
from collections import deque
from typing import Any, Deque, Dict, List, Optional, Sequence, Tuple

import numpy as np

from agents.base_agent import BaseAgent
from agents.planner_agent import PlannerAgent
from agents.policy_agent import PolicyAgent, is_stuck
from agents.video_agent import GenerationResult, RemoteVideoValidator, RuleVideoValidator, VideoAgent, derive_seed
from config.run_config import RunConfig
from envsim.gym_env import FrozenEEWrapper, SyntheticManipulationEnv
from framematch.tracker import tracker_update
from models.env import Action, TaskSpec
from models.errors import ConfigurationError
from models.matching import GoalTracker
from models.plan import PlanTable, SpatialState
from models.report import EpisodeEvent, EpisodeReport, EventKind
from spatialplan.grammar import serialize_plan
from spatialplan.vlm_client import PlanOracleClient
from videodiff.masking import mask_input

logger = logging.getLogger(__name__)


class EventLog:
    """回合事件日志（序号单调递增）"""

    def __init__(self):
        self.events: List[EpisodeEvent] = []

    def emit(self, step: int, kind: EventKind, **payload: Any) -> EpisodeEvent:
        event = EpisodeEvent(seq=len(self.events), step=step, kind=kind, payload=payload)
        self.events.append(event)
        logger.debug(f"[{event.seq}] step={step} {kind.value} {payload}")
        return event


def _vec(values) -> List[float]:
    return [float(c) for c in values]


class AgentManager:
    """智能体管理器"""

    def __init__(self, config: Optional[RunConfig] = None):
        self.config = config or RunConfig()
        self.agents: Dict[str, BaseAgent] = {}
        self.is_initialized = False

    def initialize(self, video_model=None, policy=None, planner_client: Optional[PlanOracleClient] = None,
                   validator=None):
        """装配智能体；缺少模型时报配置错误"""
        if video_model is None or policy is None:
            missing = [name for name, m in (("video", video_model), ("policy", policy)) if m is None]
            raise ConfigurationError(f"缺少已训练模型: {', '.join(missing)}")
        pc = self.config.pipeline
        if validator is None:
            if pc.remote_validator:
                if planner_client is None:
                    raise ConfigurationError("启用远程校验时必须提供远程客户端")
                validator = RemoteVideoValidator(planner_client)
            else:
                validator = RuleVideoValidator(pc.persistence_ratio, pc.progress_tolerance_px)

        self.agents = {
            "planner": PlannerAgent(client=planner_client if pc.use_remote_planner else None),
            "video": VideoAgent(video_model, validator, regen_max=pc.regen_max, steps=pc.video_sample_steps,
                                guidance_s=pc.video_guidance),
            "policy": PolicyAgent(policy, steps=pc.policy_sample_steps, guidance_s=pc.policy_guidance),
        }
        self.is_initialized = True
        logger.info("✅ 智能体管理器初始化完成")

    @property
    def planner(self) -> PlannerAgent:
        return self.agents["planner"]

    @property
    def video(self) -> VideoAgent:
        return self.agents["video"]

    @property
    def policy(self) -> PolicyAgent:
        return self.agents["policy"]

    async def _generate(self, log: EventLog, step: int, frame: np.ndarray, plan: PlanTable, task: TaskSpec,
                        state: SpatialState, master_seed: int, mask_ratio: float) -> GenerationResult:
        observation = frame
        if mask_ratio > 0.0:
            observation = mask_input(frame, mask_ratio, derive_seed(master_seed, "mask"))
        result = await self.video.generate_validated(observation, plan, task.task_id, state.p_ee, master_seed)
        for attempt in result.attempts:
            log.emit(step, EventKind.GENERATION_ATTEMPT, attempt=attempt.attempt, seed=attempt.seed)
            log.emit(step, EventKind.VALIDATION_VERDICT, attempt=attempt.attempt,
                     accepted=attempt.verdict.accepted, score=attempt.verdict.score, reason=attempt.verdict.reason)
        if result.flagged:
            logger.warning(f"⚠️ 第 {step} 步视频生成降级: 使用未通过校验的最佳结果")
        return result

    async def run_episode(self, task: TaskSpec, seed: int, mask_ratio: Optional[float] = None,
                          stall: Optional[Tuple[int, int]] = None) -> EpisodeReport:
        """执行一个闭环回合

        stall=(start, duration) 时在该区间冻结末端，用于触发重规划。
        """
        if not self.is_initialized:
            raise ConfigurationError("智能体管理器未初始化（缺少模型）")
        pc = self.config.pipeline
        ratio = pc.mask_ratio if mask_ratio is None else float(mask_ratio)
        env = SyntheticManipulationEnv(task, self.config.env.resolution)
        if stall is not None:
            env = FrozenEEWrapper(env, *stall)
        log = EventLog()

        frame, info = env.reset(seed=seed)
        state: SpatialState = info["spatial_state"]
        success = bool(info["success"])
        plan = await self.planner.plan(state, task.task_id)
        log.emit(0, EventKind.PLAN_ISSUED, stage="initial", plan_text=serialize_plan(plan))
        logger.info(f"🚀 回合开始: task={task.task_id.value}, seed={seed}, 子目标 {len(plan)} 个")

        generation = await self._generate(log, 0, frame, plan, task, state, derive_seed(seed, "video", 0), ratio)
        generations = [generation]
        tracker = GoalTracker()
        history: List[Tuple[float, float, float]] = [state.p_ee]
        queue: Deque[Action] = deque()
        scores: List[float] = []
        steps = replans = samples = 0

        while not success and steps < task.max_steps:
            update = tracker_update(tracker, frame, generation.clip, pc.match)
            scores.append(update.score.total)
            tracker = update.tracker
            if update.advanced:
                log.emit(steps, EventKind.GOAL_ADVANCE, goal_index=tracker.goal_index, forced=update.forced,
                         score=update.score.total)
                queue.clear()

            if not queue:
                goal = generation.clip.frame(tracker.goal_index)
                coord = {"p_ee": _vec(state.p_ee)}
                if self.policy.uses_object_coordinate:
                    coord["p_obj"] = _vec(state.p_obj)
                log.emit(steps, EventKind.ENCODE_COORD, **coord)
                actions = self.policy.propose(frame, goal, state.p_ee, state.p_obj, derive_seed(seed, "act", samples))
                samples += 1
                queue.extend(actions)
                log.emit(steps, EventKind.ACTIONS_SAMPLED, goal_index=tracker.goal_index, count=len(actions))

            frame, _, terminated, truncated, info = env.step(queue.popleft())
            steps += 1
            state = info["spatial_state"]
            history.append(state.p_ee)
            if terminated:
                success = True
                log.emit(steps, EventKind.SUCCESS)
                break
            if truncated:
                break

            if is_stuck(history, success, pc.stuck_window, pc.stuck_delta):
                log.emit(steps, EventKind.STUCK, window=pc.stuck_window)
                plan = await self.planner.refine(plan, state, task.task_id)
                replans += 1
                log.emit(steps, EventKind.REPLAN, replans=replans, delta_p=_vec(state.delta_p))
                log.emit(steps, EventKind.PLAN_ISSUED, stage="refined", plan_text=serialize_plan(plan))
                logger.info(f"🔄 第 {steps} 步检测到停滞，第 {replans} 次重规划")
                generation = await self._generate(log, steps, frame, plan, task, state,
                                                  derive_seed(seed, "video", replans), ratio)
                generations.append(generation)
                tracker = GoalTracker()
                history = [state.p_ee]
                queue.clear()

        log.emit(steps, EventKind.EPISODE_END, success=success, steps=steps)
        attempts = sum(g.n_attempts for g in generations)
        if success:
            logger.info(f"✅ 回合成功: task={task.task_id.value}, seed={seed}, 步数 {steps}, 重规划 {replans}")
        else:
            logger.info(f"❌ 回合失败: task={task.task_id.value}, seed={seed}, 步数 {steps}, 重规划 {replans}")
        return EpisodeReport(
            task_id=task.task_id,
            seed=seed,
            success=success,
            steps=steps,
            replans=replans,
            regenerations=attempts - len(generations),
            generation_attempts=attempts,
            flagged_generations=sum(1 for g in generations if g.flagged),
            match_scores=scores,
            final_plan_text=serialize_plan(plan),
            mask_ratio=ratio,
            events=log.events,
        )

    async def run_episodes(self, tasks: Sequence[TaskSpec], seeds: Sequence[int],
                           mask_ratio: Optional[float] = None) -> List[EpisodeReport]:
        """多个回合并发执行（各自独立环境，共享只读模型）"""
        jobs = [self.run_episode(task, seed, mask_ratio) for task in tasks for seed in seeds]
        return list(await asyncio.gather(*jobs))

    def get_agent_status(self) -> Dict[str, Any]:
        """获取所有智能体状态"""
        return {agent_id: agent.get_status() for agent_id, agent in self.agents.items()}

    def get_system_metrics(self) -> Dict[str, Any]:
        """获取系统指标"""
        total = sum(a.performance_metrics["total_requests"] for a in self.agents.values())
        ok = sum(a.performance_metrics["successful_requests"] for a in self.agents.values())
        return {
            "total_agents": len(self.agents),
            "total_requests": total,
            "success_rate": ok / total if total else 0.0,
        }
