"""
视频扩散模块测试
"""
import math

import numpy as np
import pytest
import torch
import torch.nn as nn

from conditioning import tokenize_plan
from config.run_config import RunConfig
from models.env import TaskId
from models.errors import ConfigurationError, RangeError, ShapeError, TrainingDivergedError
from models.plan import ActionType, PlanTable, Subgoal
from videodiff import (
    DiffusionTrainer,
    EMAModel,
    TrainingConfig,
    VideoDiffusionModel,
    VideoModelConfig,
    VideoSample,
    collate_video,
    cosine_interpolated_schedule,
    ddim_sample_loop,
    guided_eps,
    linear_beta_schedule,
    mask_input,
    q_sample,
    warmup_cosine,
)

TINY = VideoModelConfig(resolution=8, embed_dim=4, n_max=2, base_channels=4, channel_mult=(1, 1),
                        time_dim=8, timesteps=20)


def _plan():
    return PlanTable(subgoals=(Subgoal(action_type=ActionType.MOVE, direction=(1, 0, 0), distance=0.2),))


def _sample(rng, task=TaskId.REACH, n_max=2):
    return VideoSample(
        observation=rng.random((8, 8, 3)).astype(np.float32),
        future=rng.random((7, 8, 8, 3)).astype(np.float32),
        tokens=tokenize_plan(_plan(), n_max),
        task_id=task,
    )


@pytest.fixture
def tiny_model():
    torch.manual_seed(0)
    return VideoDiffusionModel(TINY)


class TestSchedule:
    def test_linear_endpoints(self):
        s = linear_beta_schedule(1000, 1e-4, 0.02)
        assert s.beta(1) == 1e-4
        assert s.beta(1000) == 0.02
        assert np.all(np.diff(s.betas) > 0)

    def test_cosine_endpoints(self):
        s = cosine_interpolated_schedule(100, 1e-4, 2e-2)
        assert s.beta(1) == 1e-4
        assert s.beta(100) == 2e-2
        assert np.all(np.diff(s.betas) >= 0)

    def test_alpha_bar_decreasing(self):
        s = linear_beta_schedule()
        assert s.alpha_bar(0) == 1.0
        assert np.all(np.diff(s.alpha_bars) < 0)
        assert 0.0 < s.alpha_bar(1000) < 1e-3

    def test_bad_endpoints(self):
        with pytest.raises(ConfigurationError):
            linear_beta_schedule(10, 0.5, 0.1)
        with pytest.raises(ConfigurationError):
            linear_beta_schedule(1)

    def test_ddim_timesteps(self):
        s = linear_beta_schedule(1000)
        ts = s.ddim_timesteps(50)
        assert ts[0] == 1000 and ts[-1] == 1
        assert len(ts) == 50
        assert all(a > b for a, b in zip(ts, ts[1:]))
        with pytest.raises(ConfigurationError):
            s.ddim_timesteps(0)


class TestForwardNoising:
    def test_variance_matches_schedule(self):
        s = linear_beta_schedule()
        gen = torch.Generator().manual_seed(0)
        x0 = torch.full((20000, 1), 0.5, dtype=torch.float64)
        eps = torch.randn(x0.shape, generator=gen, dtype=torch.float64)
        x_t = q_sample(x0, 500, eps, s)
        ab = s.alpha_bar(500)
        assert x_t.mean().item() == pytest.approx(math.sqrt(ab) * 0.5, abs=0.02)
        assert x_t.var().item() == pytest.approx(1.0 - ab, rel=0.05)

    def test_shape_mismatch(self):
        s = linear_beta_schedule(10)
        with pytest.raises(ShapeError):
            q_sample(torch.zeros(2, 3), 1, torch.zeros(2, 4), s)

    def test_time_out_of_range(self):
        s = linear_beta_schedule(10)
        with pytest.raises(RangeError):
            q_sample(torch.zeros(2, 3), 11, torch.zeros(2, 3), s)


class TestDDIM:
    @pytest.mark.parametrize("steps", [1, 10])
    def test_oracle_noise_recovers_x0(self, steps):
        s = linear_beta_schedule(100)
        target = torch.linspace(-0.9, 0.9, 12, dtype=torch.float64).reshape(1, 12)

        def eps_fn(x, t, use_null):
            ab = s.alpha_bar_at(t, x)
            return (x - ab.sqrt() * target) / (1.0 - ab).sqrt()

        out = ddim_sample_loop(eps_fn, (1, 12), s, steps, 1.0, torch.Generator().manual_seed(3),
                               dtype=torch.float64)
        assert torch.allclose(out, target, atol=1e-8)

    def test_intermediate_states_follow_unclipped_update(self):
        s = linear_beta_schedule(50)
        target = torch.full((1, 6), 5.0, dtype=torch.float64)
        seen = []

        def eps_fn(x, t, use_null):
            seen.append((int(t[0]), x.clone()))
            ab = s.alpha_bar_at(t, x)
            return (x - ab.sqrt() * target) / (1.0 - ab).sqrt()

        out = ddim_sample_loop(eps_fn, (1, 6), s, 8, 1.0, torch.Generator().manual_seed(1),
                               dtype=torch.float64)
        t0, x_T = seen[0]
        eps0 = (x_T - s.alpha_bar(t0) ** 0.5 * target) / (1.0 - s.alpha_bar(t0)) ** 0.5
        for t, x in seen[1:]:
            expected = s.alpha_bar(t) ** 0.5 * target + (1.0 - s.alpha_bar(t)) ** 0.5 * eps0
            assert torch.allclose(x, expected, atol=1e-8)
        assert torch.equal(out, torch.ones_like(out))

    def test_guidance_zero_uses_null_only(self):
        calls = []

        def eps_fn(x, t, use_null):
            calls.append(use_null)
            return torch.zeros_like(x)

        guided_eps(eps_fn, torch.zeros(1, 2), torch.ones(1, dtype=torch.long), 0.0)
        assert calls == [True]

    def test_guidance_combination(self):
        def eps_fn(x, t, use_null):
            return torch.zeros_like(x) if use_null else torch.ones_like(x)

        out = guided_eps(eps_fn, torch.zeros(1, 2), torch.ones(1, dtype=torch.long), 2.0)
        assert torch.equal(out, torch.full((1, 2), 2.0))

    def test_negative_guidance(self):
        s = linear_beta_schedule(10)
        with pytest.raises(ValueError):
            ddim_sample_loop(lambda x, t, n: x, (1, 2), s, 2, -1.0, torch.Generator())


class TestVideoModel:
    def test_loss_gradient_matches_finite_difference(self, tiny_model, rng, fd_check):
        model = tiny_model.double()
        batch = collate_video([_sample(rng), _sample(rng, TaskId.PUSH)])
        batch = batch.model_copy(update={
            "observation": batch.observation.double(),
            "future": batch.future.double(),
            "distance": batch.distance.double(),
        })
        gen = torch.Generator().manual_seed(5)
        t = torch.tensor([3, 17])
        eps = torch.randn(batch.future.shape, generator=gen, dtype=torch.float64)
        drop = torch.tensor([False, True])
        params = [model.unet.out.weight, model.encoder.subgoal_mlp[0].weight, model.null_condition]
        err = fd_check(lambda: model.training_loss(batch, t=t, eps=eps, drop_mask=drop), params)
        assert err < 1e-4

    def test_oracle_denoiser_zero_loss(self, tiny_model, rng, mocker):
        batch = collate_video([_sample(rng)])
        eps = torch.randn(batch.future.shape)
        mocker.patch.object(tiny_model, "denoise", return_value=eps)
        loss = tiny_model.training_loss(batch, eps=eps)
        assert loss.item() == 0.0

    def test_null_draw_fraction(self, tiny_model):
        mask = tiny_model.draw_null_mask(5000, torch.Generator().manual_seed(0))
        assert 0.08 <= mask.float().mean().item() <= 0.12

    def test_task_only_baseline_never_drops_condition(self, rng, mocker):
        torch.manual_seed(0)
        baseline = VideoDiffusionModel(TINY.model_copy(update={"use_subplan": False}))
        assert not baseline.draw_null_mask(1000, torch.Generator().manual_seed(0)).any()
        spy = mocker.spy(baseline, "denoise")
        baseline.sample(rng.random((8, 8, 3)).astype(np.float32), _plan(), TaskId.REACH, steps=2,
                        guidance_s=2.0, seed=0)
        assert spy.call_count == 2
        assert all(call.args[-1] is False for call in spy.call_args_list)

    def test_sample_shape_and_determinism(self, tiny_model, rng):
        obs = rng.random((8, 8, 3)).astype(np.float32)
        tiny_model.eval()
        a = tiny_model.sample(obs, _plan(), TaskId.REACH, steps=4, guidance_s=2.0, seed=11)
        b = tiny_model.sample(obs, _plan(), TaskId.REACH, steps=4, guidance_s=2.0, seed=11)
        assert a.frames.shape == (8, 8, 8, 3)
        assert np.array_equal(a.frames, b.frames)
        assert np.array_equal(a.frames[0], obs)
        assert a.frames.min() >= 0.0 and a.frames.max() <= 1.0

    def test_guidance_zero_ignores_plan(self, tiny_model, rng):
        obs = rng.random((8, 8, 3)).astype(np.float32)
        a = tiny_model.sample(obs, _plan(), TaskId.REACH, steps=3, guidance_s=0.0, seed=2)
        b = tiny_model.sample(obs, None, TaskId.PUSH, steps=3, guidance_s=0.0, seed=2)
        assert np.array_equal(a.frames, b.frames)

    def test_odd_resolution_rejected(self, tiny_model):
        with pytest.raises(ShapeError):
            tiny_model.sample(np.zeros((7, 7, 3), np.float32), None, TaskId.REACH, steps=2)
        with pytest.raises(ValueError):
            VideoModelConfig(resolution=9)


class TestEMA:
    def test_single_update_exact(self):
        torch.manual_seed(0)
        net = nn.Linear(3, 2)
        ema = EMAModel(net, decay=0.999)
        shadow = [p.detach().clone() for p in ema.averaged_model.parameters()]
        with torch.no_grad():
            for p in net.parameters():
                p.add_(1.0)
        assert ema.step(net)
        for s, p, e in zip(shadow, net.parameters(), ema.averaged_model.parameters()):
            assert torch.allclose(e, 0.999 * s + 0.001 * p, atol=1e-7)

    def test_update_every(self):
        net = nn.Linear(2, 2)
        ema = EMAModel(net, decay=0.9, update_every=10)
        updates = [ema.step(net) for _ in range(25)]
        assert sum(updates) == 2
        assert updates[9] and updates[19]

    def test_geometric_convergence(self):
        net = nn.Linear(2, 1)
        ema = EMAModel(net, decay=0.5)
        with torch.no_grad():
            net.weight.add_(4.0)
        gap0 = (ema.averaged_model.weight - net.weight).abs().max().item()
        for _ in range(3):
            ema.step(net)
        gap = (ema.averaged_model.weight - net.weight).abs().max().item()
        assert gap == pytest.approx(gap0 * 0.5 ** 3, rel=1e-5)

    def test_warmup_decay_capped(self):
        ema = EMAModel(nn.Linear(1, 1), decay=0.9999, use_warmup=True)
        assert ema.get_decay() == 0.0
        ema.num_updates = 10 ** 9
        assert ema.get_decay() == 0.9999


class TestTrainer:
    def test_warmup_cosine(self):
        f = warmup_cosine(10, 110)
        assert f(0) == pytest.approx(0.1)
        assert f(10) == pytest.approx(1.0)
        assert f(110) == pytest.approx(0.0, abs=1e-12)

    def test_fit_records_history(self, tiny_model, rng):
        samples = [_sample(rng) for _ in range(4)]
        cfg = TrainingConfig(steps=3, batch_size=2, warmup_steps=1, ema_every=1, log_every=1)
        trainer = DiffusionTrainer(tiny_model, collate_video, cfg, name="video")
        result = trainer.fit(samples, val_samples=samples[:2])
        assert result.steps == 3
        assert len(result.loss_history) == 3
        assert all(math.isfinite(v) for v in result.loss_history)
        assert math.isfinite(result.val_loss)
        assert trainer.ema.num_updates == 3

    def test_video_ema_tracks_live_weights(self, tiny_model, rng):
        section = RunConfig().video.model_copy(update={"steps": 20, "batch_size": 1, "warmup_steps": 1})
        cfg = TrainingConfig.from_section(section, seed=0)
        assert cfg.ema_warmup and cfg.ema_every == 10
        initial = [p.detach().clone() for p in tiny_model.parameters()]
        trainer = DiffusionTrainer(tiny_model, collate_video, cfg, name="video")
        trainer.fit([_sample(rng) for _ in range(2)])
        assert trainer.ema.num_updates == 2
        live = torch.cat([p.detach().flatten() for p in tiny_model.parameters()])
        shadow = torch.cat([p.detach().flatten() for p in trainer.ema.averaged_model.parameters()])
        start = torch.cat([p.flatten() for p in initial])
        assert (live - start).norm() > 0
        assert (shadow - live).norm() < 0.5 * (live - start).norm()

    def test_divergence_raises(self, tiny_model, rng, mocker):
        cfg = TrainingConfig(steps=1, batch_size=1)
        trainer = DiffusionTrainer(tiny_model, collate_video, cfg)
        mocker.patch.object(tiny_model, "training_loss", return_value=torch.tensor(float("nan")))
        with pytest.raises(TrainingDivergedError):
            trainer.fit([_sample(rng)])

    @pytest.mark.slow
    def test_overfit_single_sample(self, rng):
        torch.manual_seed(0)
        model = VideoDiffusionModel(TINY)
        samples = [_sample(rng)]
        cfg = TrainingConfig(steps=300, batch_size=1, warmup_steps=10, lr=3e-3)
        result = DiffusionTrainer(model, collate_video, cfg).fit(samples)
        first = np.mean(result.loss_history[:20])
        last = np.mean(result.loss_history[-20:])
        assert last < first


class TestMasking:
    def test_ratio_coverage(self, rng):
        frame = rng.random((32, 32, 3)).astype(np.float32) + 0.1
        masked = mask_input(frame, 0.25, seed=4)
        fraction = np.all(masked == 0.0, axis=-1).mean()
        assert 0.20 <= fraction <= 0.30

    def test_deterministic_and_pure(self, rng):
        frame = rng.random((32, 32, 3)).astype(np.float32)
        before = frame.copy()
        assert np.array_equal(mask_input(frame, 0.25, 1), mask_input(frame, 0.25, 1))
        assert np.array_equal(frame, before)

    def test_zero_ratio_identity(self, rng):
        frame = rng.random((16, 16, 3)).astype(np.float32)
        assert np.array_equal(mask_input(frame, 0.0, 0), frame)

    def test_bad_ratio(self):
        with pytest.raises(RangeError):
            mask_input(np.zeros((8, 8, 3)), 1.0, 0)
