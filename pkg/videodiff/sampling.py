"""
DDIM 采样（η = 0）与无分类器引导
"""
from typing import Callable, Optional

import torch

from videodiff.schedule import DiffusionSchedule

# eps_fn(x_t, t_batch, use_null) -> eps_hat
EpsFn = Callable[[torch.Tensor, torch.Tensor, bool], torch.Tensor]


def guided_eps(eps_fn: EpsFn, x: torch.Tensor, t: torch.Tensor, guidance_s: float) -> torch.Tensor:
    """ε̂ = ε_null + s·(ε_cond − ε_null)"""
    if guidance_s == 0.0:
        return eps_fn(x, t, True)
    if guidance_s == 1.0:
        return eps_fn(x, t, False)
    eps_null = eps_fn(x, t, True)
    eps_cond = eps_fn(x, t, False)
    return eps_null + guidance_s * (eps_cond - eps_null)


def predict_x0(x_t: torch.Tensor, eps: torch.Tensor, alpha_bar: float) -> torch.Tensor:
    """x̂_0 = (x_t − √(1−ᾱ_t)·ε̂)/√ᾱ_t"""
    return (x_t - (1.0 - alpha_bar) ** 0.5 * eps) / alpha_bar ** 0.5


@torch.no_grad()
def ddim_sample_loop(eps_fn: EpsFn, shape: tuple, sched: DiffusionSchedule, steps: int, guidance_s: float,
                     generator: torch.Generator, dtype: torch.dtype = torch.float32,
                     device: Optional[torch.device] = None) -> torch.Tensor:
    """确定性 DDIM：在均匀抽取的 steps 个时间步上去噪；仅对最终帧截断到 [−1,1]"""
    if guidance_s < 0:
        raise ValueError(f"引导系数必须非负: {guidance_s}")
    x = torch.randn(shape, generator=generator, dtype=dtype).to(device or "cpu")
    timesteps = sched.ddim_timesteps(steps)
    for i, t in enumerate(timesteps):
        t_prev = timesteps[i + 1] if i + 1 < len(timesteps) else 0
        t_batch = torch.full((shape[0],), t, dtype=torch.long, device=x.device)
        eps = guided_eps(eps_fn, x, t_batch, guidance_s)
        ab_t, ab_prev = sched.alpha_bar(t), sched.alpha_bar(t_prev)
        x0 = predict_x0(x, eps, ab_t)
        x = ab_prev ** 0.5 * x0 + (1.0 - ab_prev) ** 0.5 * eps
    return x.clamp(-1.0, 1.0)
