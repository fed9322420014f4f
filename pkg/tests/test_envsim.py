"""
合成环境测试
"""
import numpy as np
import pytest

from envsim import (
    FrozenEEWrapper,
    SyntheticManipulationEnv,
    check_success,
    default_task,
    expert_action,
    get_spatial_state,
    load_tasks,
    render,
    reset,
    step,
)
from envsim.renderer import EE_CHANNEL, GOAL_CHANNEL, OBJECT_CHANNEL
from models.env import DELTA_MAX, GRASP_RADIUS, Action, EnvState, TaskId
from models.errors import ConfigurationError, EpisodeExhaustedError


def _state(task_id="reach", ee=(0.5, 0.5, 0.5), obj=(0.5, 0.5, 0.5), **kwargs) -> EnvState:
    return EnvState(ee_pos=ee, obj_pos=obj, task=default_task(task_id), **kwargs)


def _rollout(task_id, seed):
    state = reset(default_task(task_id), seed)
    while state.step_count < state.task.max_steps and not check_success(state):
        state = step(state, expert_action(state))
    return state


class TestReset:
    def test_seeded_determinism(self):
        assert reset(default_task("reach"), 0) == reset(default_task("reach"), 0)

    def test_jitter_bounded(self):
        task = default_task("push")
        for seed in range(20):
            state = reset(task, seed)
            assert np.linalg.norm(state.obj - np.asarray(task.object_start)) <= 0.05 + 1e-12

    def test_initial_contract(self):
        state = reset(default_task("pick_place"), 7)
        assert state.attached is False
        assert state.step_count == 0

    def test_unknown_task(self):
        with pytest.raises(ConfigurationError):
            default_task("stack_blocks")

    def test_load_tasks(self, tmp_path):
        path = tmp_path / "tasks.json"
        path.write_text(
            '{"resolution": 16, "tasks": [{"task_id": "push", "object_start": [0.4, 0.5, 0.5],'
            ' "goal_region": {"center": [0.7, 0.5, 0.5], "radius": 0.05}, "max_steps": 80}]}'
        )
        tasks, resolution = load_tasks(path)
        assert resolution == 16
        assert tasks[0].task_id is TaskId.PUSH
        assert tasks[0].max_steps == 80

    def test_load_tasks_rejects_out_of_workspace(self, tmp_path):
        path = tmp_path / "tasks.json"
        path.write_text(
            '{"tasks": [{"task_id": "push", "object_start": [1.4, 0.5, 0.5],'
            ' "goal_region": {"center": [0.7, 0.5, 0.5]}}]}'
        )
        with pytest.raises(ConfigurationError):
            load_tasks(path)


class TestStep:
    def test_zero_action(self):
        state = _state(ee=(0.3, 0.4, 0.5), obj=(0.8, 0.8, 0.8))
        nxt = step(state, Action(delta=(0.0, 0.0, 0.0), gripper=-1.0))
        assert nxt.ee_pos == state.ee_pos
        assert nxt.step_count == 1

    def test_workspace_clipping(self):
        state = _state(ee=(0.99, 0.5, 0.5), obj=(0.2, 0.2, 0.2))
        nxt = step(state, Action(delta=(0.05, 0.0, 0.0)))
        assert nxt.ee_pos[0] == 1.0

    def test_delta_clipped_before_integration(self):
        state = _state(ee=(0.5, 0.5, 0.5), obj=(0.1, 0.1, 0.1))
        nxt = step(state, Action(delta=(0.3, -0.3, 0.0)))
        assert nxt.ee_pos[0] == pytest.approx(0.5 + DELTA_MAX)
        assert nxt.ee_pos[1] == pytest.approx(0.5 - DELTA_MAX)

    def test_rigid_attachment(self):
        state = _state("pick_place", ee=(0.5, 0.5, 0.5), obj=(0.51, 0.5, 0.5), gripper_closed=True, attached=True)
        nxt = step(state, Action(delta=(0.02, 0.0, 0.0), gripper=1.0))
        assert np.allclose(nxt.obj - state.obj, [0.02, 0.0, 0.0], atol=1e-12)
        assert nxt.attached

    def test_grasp_engages_within_radius(self):
        state = _state("pick_place", ee=(0.5, 0.5, 0.5), obj=(0.52, 0.5, 0.5))
        nxt = step(state, Action(delta=(0.0, 0.0, 0.0), gripper=1.0))
        assert nxt.attached and nxt.gripper_closed

    def test_release(self):
        state = _state("pick_place", ee=(0.5, 0.5, 0.5), obj=(0.5, 0.5, 0.5), gripper_closed=True, attached=True)
        nxt = step(state, Action(delta=(0.01, 0.0, 0.0), gripper=-1.0))
        assert not nxt.attached
        assert nxt.obj_pos == state.obj_pos

    def test_push_contact_moves_object(self):
        state = _state("push", ee=(0.4, 0.5, 0.5), obj=(0.42, 0.5, 0.5))
        nxt = step(state, Action(delta=(0.03, 0.0, 0.0)))
        assert nxt.obj_pos[0] == pytest.approx(0.45)

    def test_push_without_contact(self):
        state = _state("push", ee=(0.2, 0.5, 0.5), obj=(0.42, 0.5, 0.5))
        nxt = step(state, Action(delta=(0.03, 0.0, 0.0)))
        assert nxt.obj_pos == state.obj_pos

    def test_exhausted(self):
        task = default_task("reach").model_copy(update={"max_steps": 1})
        state = step(reset(task, 0), Action())
        with pytest.raises(EpisodeExhaustedError):
            step(state, Action())

    def test_workspace_closure_and_attachment(self, rng):
        state = _state("pick_place", ee=(0.5, 0.5, 0.5), obj=(0.5, 0.5, 0.5))
        for _ in range(100):
            delta = rng.uniform(-0.1, 0.1, size=3)
            state = step(state, Action(delta=tuple(delta), gripper=float(rng.choice([-1.0, 1.0], p=[0.1, 0.9]))))
            assert np.all((state.ee >= 0) & (state.ee <= 1))
            assert np.all((state.obj >= 0) & (state.obj <= 1))
            if state.attached:
                assert np.linalg.norm(state.obj - state.ee) <= GRASP_RADIUS + 1e-12

    def test_determinism(self, rng):
        actions = [Action(delta=tuple(rng.uniform(-0.05, 0.05, 3)), gripper=1.0) for _ in range(30)]
        runs = []
        for _ in range(2):
            state = reset(default_task("pick_place"), 3)
            states = [state]
            for a in actions:
                state = step(state, a)
                states.append(state)
            runs.append(states)
        assert runs[0] == runs[1]
        assert all(np.array_equal(render(a), render(b)) for a, b in zip(*runs))


class TestRender:
    def test_deterministic(self):
        state = reset(default_task("push"), 2)
        assert np.array_equal(render(state), render(state))

    def test_shape_and_range(self):
        frame = render(reset(default_task("reach"), 0), resolution=24)
        assert frame.shape == (24, 24, 3)
        assert frame.dtype == np.float32
        assert frame.min() >= 0.0 and frame.max() <= 1.0

    def test_object_always_drawn(self, rng):
        for _ in range(50):
            state = _state(ee=tuple(rng.uniform(0, 1, 3)), obj=tuple(rng.uniform(0, 1, 3)))
            assert (render(state)[..., OBJECT_CHANNEL] > 0).sum() > 0

    def test_z_changes_only_brightness(self):
        a = _state(ee=(0.3, 0.3, 0.2), obj=(0.6, 0.7, 0.4))
        b = _state(ee=(0.3, 0.3, 0.9), obj=(0.6, 0.7, 0.4))
        fa, fb = render(a), render(b)
        assert np.array_equal(fa[..., EE_CHANNEL] > 0, fb[..., EE_CHANNEL] > 0)
        assert np.array_equal(fa[..., OBJECT_CHANNEL], fb[..., OBJECT_CHANNEL])
        assert np.array_equal(fa[..., GOAL_CHANNEL], fb[..., GOAL_CHANNEL])
        assert fb[..., EE_CHANNEL].max() > fa[..., EE_CHANNEL].max()

    def test_plus_x_renders_left(self):
        left = render(_state(ee=(0.9, 0.5, 0.5), obj=(0.5, 0.1, 0.5)))
        right = render(_state(ee=(0.1, 0.5, 0.5), obj=(0.5, 0.1, 0.5)))
        col_left = np.nonzero(left[..., EE_CHANNEL].max(axis=0))[0].mean()
        col_right = np.nonzero(right[..., EE_CHANNEL].max(axis=0))[0].mean()
        assert col_left < col_right


class TestSpatialState:
    def test_offset(self):
        s = get_spatial_state(_state(ee=(0.1, 0.2, 0.3), obj=(0.4, 0.2, 0.1)))
        assert s.delta_p == pytest.approx((0.3, 0.0, -0.2))

    def test_identity(self):
        s = get_spatial_state(_state(ee=(0.4, 0.4, 0.4), obj=(0.4, 0.4, 0.4)))
        assert s.delta_p == (0.0, 0.0, 0.0)

    def test_accessor_bitwise(self):
        state = reset(default_task("push"), 5)
        assert get_spatial_state(state).p_ee == state.ee_pos


class TestSuccess:
    def test_reach_at_goal(self):
        state = reset(default_task("reach"), 0)
        at_goal = state.model_copy(update={"ee_pos": state.task.goal_region.center})
        assert check_success(at_goal)

    def test_push_strict_threshold(self):
        task = default_task("push")
        gx, gy, gz = task.goal_region.center
        state = EnvState(ee_pos=(0.1, 0.1, 0.1), obj_pos=(gx - task.goal_region.radius - 0.01, gy, gz), task=task)
        assert not check_success(state)

    def test_pick_place_requires_release(self):
        task = default_task("pick_place")
        center = task.goal_region.center
        state = EnvState(ee_pos=center, obj_pos=center, gripper_closed=True, attached=True, task=task)
        assert not check_success(state)
        assert check_success(state.model_copy(update={"attached": False, "gripper_closed": False}))


class TestExpert:
    def test_direction_sign(self):
        action = expert_action(_state("push", ee=(0.1, 0.5, 0.5), obj=(0.8, 0.5, 0.5)))
        assert action.delta[0] > 0

    def test_bounds(self, rng):
        for task_id in ("reach", "push", "pick_place"):
            for _ in range(20):
                action = expert_action(_state(task_id, ee=tuple(rng.uniform(0, 1, 3)), obj=tuple(rng.uniform(0, 1, 3))))
                assert all(abs(c) <= DELTA_MAX for c in action.delta)

    def test_reach_seed_zero_succeeds(self):
        assert check_success(_rollout("reach", 0))

    @pytest.mark.parametrize("task_id", ["reach", "push", "pick_place"])
    def test_expert_completeness(self, task_id):
        successes = sum(check_success(_rollout(task_id, seed)) for seed in range(100))
        assert successes >= 95


class TestGymEnv:
    def test_reset_and_step(self):
        env = SyntheticManipulationEnv(default_task("reach"), resolution=16)
        obs, info = env.reset(seed=0)
        assert obs.shape == (16, 16, 3)
        assert info["spatial_state"].p_ee == (0.2, 0.5, 0.5)
        obs, reward, terminated, truncated, info = env.step(np.array([0.05, 0.0, 0.0, -1.0]))
        assert info["step_count"] == 1
        assert reward == 0.0 and not terminated and not truncated

    def test_frozen_wrapper_stalls_ee(self):
        env = FrozenEEWrapper(SyntheticManipulationEnv(default_task("reach")), start=1, duration=3)
        _, info = env.reset(seed=0)
        start = info["spatial_state"].p_ee
        _, _, _, _, info = env.step(np.array([0.05, 0.0, 0.0, -1.0]))
        moved = info["spatial_state"].p_ee
        assert moved != start
        for _ in range(3):
            _, _, _, _, info = env.step(np.array([0.05, 0.0, 0.0, -1.0]))
            assert info["spatial_state"].p_ee == moved
        assert env.frozen_steps == 3
