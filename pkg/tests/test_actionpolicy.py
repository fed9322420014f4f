"""
扩散动作策略测试
"""
import numpy as np
import pytest
import torch
from scipy import stats

from actionpolicy import (
    ActionNormalizer,
    DiffusionPolicy,
    PolicyModelConfig,
    PolicySample,
    cosine_beta_schedule,
    sample_goal_index,
)
from models.env import DELTA_MAX, TaskId
from models.errors import ConfigurationError, RangeError, ShapeError

TINY = PolicyModelConfig(cond_dim=8, encoder_channels=(4,), down_dims=(4, 8), time_dim=4, timesteps=20)


@pytest.fixture
def policy():
    torch.manual_seed(0)
    return DiffusionPolicy(TINY)


def _frame(rng, size=8):
    return rng.random((size, size, 3)).astype(np.float32)


def _sample(rng):
    return PolicySample(
        current=_frame(rng),
        goal=_frame(rng),
        p_ee=rng.random(3),
        p_obj=rng.random(3),
        actions=np.column_stack([rng.uniform(-DELTA_MAX, DELTA_MAX, (4, 3)), rng.choice([-1.0, 1.0], 4)]),
        task_id=TaskId.REACH,
    )


class TestCosineSchedule:
    def test_endpoints(self):
        s = cosine_beta_schedule(100, 1e-4, 2e-2)
        assert s.beta(1) == 1e-4
        assert s.beta(100) == 0.02

    def test_midpoint_symmetry(self):
        s = cosine_beta_schedule(101, 1e-4, 2e-2)
        assert s.beta(51) == pytest.approx((1e-4 + 2e-2) / 2, rel=1e-12)

    def test_monotone(self):
        assert np.all(np.diff(cosine_beta_schedule().betas) >= 0)

    def test_invalid(self):
        with pytest.raises(ConfigurationError):
            cosine_beta_schedule(100, 0.0, 0.02)


class TestGoalIndex:
    def test_window(self):
        rng = np.random.default_rng(0)
        draws = [sample_goal_index(0, 100, 20, rng) for _ in range(500)]
        assert min(draws) >= 1 and max(draws) <= 20

    def test_boundary(self):
        assert sample_goal_index(99, 100, 20, np.random.default_rng(0)) == 100

    def test_out_of_range(self):
        with pytest.raises(RangeError):
            sample_goal_index(100, 100)

    def test_uniform(self):
        rng = np.random.default_rng(7)
        draws = np.array([sample_goal_index(10, 200, 20, rng) for _ in range(10_000)])
        counts = np.bincount(draws - 11, minlength=20)
        assert len(counts) == 20
        assert stats.chisquare(counts).pvalue > 0.01


class TestNormalizer:
    def test_round_trip(self, rng):
        norm = ActionNormalizer()
        a = np.column_stack([rng.uniform(-DELTA_MAX, DELTA_MAX, (10, 3)), rng.uniform(-1, 1, 10)])
        assert np.allclose(norm.denormalize(norm.normalize(a)), a, atol=1e-6)
        assert np.abs(norm.normalize(a)).max() <= 1.0


class TestCondition:
    def test_length_and_purity(self, policy, rng):
        cur, goal, p = _frame(rng), _frame(rng), rng.random(3)
        c1 = policy.encode_condition(cur, goal, p)
        c2 = policy.encode_condition(cur, goal, p)
        assert c1.shape == (TINY.cond_dim,)
        assert torch.equal(c1, c2)

    def test_coordinate_ablation(self, policy, rng):
        with torch.no_grad():
            for p in policy.coord_encoder.parameters():
                p.zero_()
        cur, goal = _frame(rng), _frame(rng)
        a = policy.encode_condition(cur, goal, np.array([0.1, 0.2, 0.3]))
        b = policy.encode_condition(cur, goal, np.array([0.9, 0.8, 0.7]))
        assert torch.equal(a, b)

    def test_shape_mismatch(self, policy, rng):
        with pytest.raises(ShapeError):
            policy.encode_condition(_frame(rng, 8), _frame(rng, 16), np.zeros(3))

    def test_object_coordinate_flag(self, rng):
        torch.manual_seed(0)
        model = DiffusionPolicy(TINY.model_copy(update={"coord_with_object": True}))
        c = model.encode_condition(_frame(rng), _frame(rng), np.zeros(3), np.ones(3))
        assert c.shape == (TINY.cond_dim,)
        with pytest.raises(ShapeError):
            model.encode_condition(_frame(rng), _frame(rng), np.zeros(3))


class TestPolicyLoss:
    def test_non_negative(self, policy, rng):
        batch = policy.collate([_sample(rng) for _ in range(3)])
        assert policy.training_loss(batch, torch.Generator().manual_seed(0)).item() >= 0.0

    def test_oracle_denoiser_zero(self, policy, rng, mocker):
        batch = policy.collate([_sample(rng)])
        eps = torch.randn(batch.actions.shape)
        mocker.patch.object(policy, "denoise", return_value=eps)
        assert policy.training_loss(batch, eps=eps).item() == 0.0

    def test_small_instance(self, policy):
        assert sum(p.numel() for p in policy.parameters()) <= 5000

    def test_gradient_matches_finite_difference(self, policy, rng, fd_check):
        model = policy.double()
        batch = model.collate([_sample(rng), _sample(rng)])
        batch = batch.model_copy(update={
            "obs_stack": batch.obs_stack.double(),
            "coord": batch.coord.double(),
            "actions": batch.actions.double(),
        })
        t = torch.tensor([2, 15])
        eps = torch.randn(batch.actions.shape, generator=torch.Generator().manual_seed(1), dtype=torch.float64)
        drop = torch.tensor([True, False])
        params = [model.unet.final_conv[1].weight, model.coord_encoder.mlp[0].weight,
                  model.obs_encoder.head.weight, model.null_condition]
        err = fd_check(lambda: model.training_loss(batch, t=t, eps=eps, drop_mask=drop), params)
        assert err < 1e-3

    def test_label_shape_checked(self, policy, rng):
        bad = _sample(rng).model_copy(update={"actions": np.zeros((3, 4))})
        with pytest.raises(ShapeError):
            policy.collate([bad])


class TestSampling:
    def test_shape_and_determinism(self, policy, rng):
        cur, goal, p = _frame(rng), _frame(rng), rng.random(3)
        a = policy.sample(cur, goal, p, steps=5, guidance_s=1.0, seed=3)
        b = policy.sample(cur, goal, p, steps=5, guidance_s=1.0, seed=3)
        assert a.actions.shape == (4, 4)
        assert np.array_equal(a.actions, b.actions)
        assert np.abs(a.actions).max() <= 1.0

    def test_guidance_zero_is_null_branch(self, policy, rng):
        a = policy.sample(_frame(rng), _frame(rng), np.zeros(3), steps=4, guidance_s=0.0, seed=9)
        b = policy.sample(_frame(rng), _frame(rng), np.ones(3), steps=4, guidance_s=0.0, seed=9)
        assert np.array_equal(a.actions, b.actions)

    def test_act_denormalizes(self, policy, rng):
        actions = policy.act(_frame(rng), _frame(rng), rng.random(3), steps=3)
        assert len(actions) == 4
        for a in actions:
            assert max(abs(c) for c in a.delta) <= DELTA_MAX + 1e-9
            assert -1.0 <= a.gripper <= 1.0


@pytest.mark.slow
def test_behavior_cloning_reach_smoke():
    from datasetkit import build_policy_training_set, record_trajectory
    from envsim import default_task, get_spatial_state, render, reset
    from videodiff import DiffusionTrainer, TrainingConfig

    records = [record_trajectory(default_task(TaskId.REACH), seed) for seed in range(20)]
    samples = build_policy_training_set(records, k=20, horizon=4, seed=0)
    torch.manual_seed(0)
    model = DiffusionPolicy(PolicyModelConfig())
    cfg = TrainingConfig(steps=1500, batch_size=32, lr=1e-3, warmup_steps=50, ema_decay=0.999,
                         ema_every=1, ema_warmup=True, log_every=500)
    trainer = DiffusionTrainer(model, model.collate, cfg, name="policy")
    trainer.fit(samples)
    ema = trainer.ema.averaged_model

    hits = 0
    for seed in range(100, 150):
        state = reset(default_task(TaskId.REACH), seed)
        ref = record_trajectory(default_task(TaskId.REACH), seed)
        goal = ref.frames[min(20, ref.length - 1)]
        actions = ema.act(render(state), goal, np.asarray(state.ee), steps=10, guidance_s=1.0, seed=seed)
        delta_p = np.asarray(get_spatial_state(state).delta)
        if np.dot(actions[0].delta, delta_p) > 0:
            hits += 1
    assert hits >= 40
