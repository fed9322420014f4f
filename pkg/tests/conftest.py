"""
测试公共配置与夹具
"""
import sys
from pathlib import Path

import numpy as np
import pytest
import torch

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))


def pytest_addoption(parser):
    parser.addoption("--run-slow", action="store_true", default=False, help="运行训练冒烟与闭环验收测试")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow"):
        return
    skip_slow = pytest.mark.skip(reason="需要 --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def relative_error(analytic: torch.Tensor, numeric: torch.Tensor) -> float:
    """梯度相对误差（分母下限 1e-8）"""
    diff = (analytic - numeric).abs().max().item()
    scale = max(analytic.abs().max().item(), numeric.abs().max().item(), 1e-8)
    return diff / scale


def finite_difference_check(loss_fn, params, eps: float = 1e-6, max_entries: int = 40, seed: int = 0) -> float:
    """对参数的随机子集做中心差分，返回最大相对误差

    loss_fn 无参数，返回标量张量；params 为 float64 叶子张量列表。
    """
    for p in params:
        if p.grad is not None:
            p.grad = None
    loss = loss_fn()
    grads = torch.autograd.grad(loss, params, allow_unused=True)

    rng = np.random.default_rng(seed)
    analytic, numeric = [], []
    for p, g in zip(params, grads):
        g = torch.zeros_like(p) if g is None else g
        flat = p.data.view(-1)
        count = min(max_entries, flat.numel())
        for idx in rng.choice(flat.numel(), size=count, replace=False):
            original = flat[idx].item()
            with torch.no_grad():
                flat[idx] = original + eps
                plus = loss_fn().item()
                flat[idx] = original - eps
                minus = loss_fn().item()
                flat[idx] = original
            numeric.append((plus - minus) / (2 * eps))
            analytic.append(g.view(-1)[idx].item())
    return relative_error(torch.tensor(analytic, dtype=torch.float64), torch.tensor(numeric, dtype=torch.float64))


@pytest.fixture
def fd_check():
    return finite_difference_check


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
