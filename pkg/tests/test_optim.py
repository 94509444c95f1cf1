import numpy as np
import pytest

from treelm.autograd import GradTape, Tensor
from treelm import autograd as ag
from treelm.optim import GradientError, OptimConfig, Optimizer


def test_sgd_single_step():
    p = Tensor([1.0])
    p.grad = np.array([0.5])
    opt = Optimizer([("p", p)], OptimConfig(lr=0.1, clip_norm=None))
    opt.step()
    assert p.values[0] == pytest.approx(0.95, abs=1e-15)


def test_clip_norm_scales_gradient():
    p = Tensor([0.0])
    p.grad = np.array([10.0])
    opt = Optimizer([("p", p)], OptimConfig(lr=1.0, clip_norm=1.0))
    opt.step()
    # norm 10 clipped to 1: effective gradient 1.0
    assert p.values[0] == pytest.approx(-1.0, abs=1e-12)


def test_clip_noop_under_threshold():
    p = Tensor([0.0])
    p.grad = np.array([0.5])
    opt = Optimizer([("p", p)], OptimConfig(lr=1.0, clip_norm=5.0))
    opt.step()
    assert p.values[0] == pytest.approx(-0.5)


@pytest.mark.parametrize("algorithm", ["sgd", "adam"])
def test_quadratic_descends(algorithm):
    # f(x) = sum((x - 3)^2); SGD with small lr is monotone, Adam converges
    x = Tensor(np.array([10.0, -4.0]))
    target = np.array([3.0, 3.0])
    lr = 0.05 if algorithm == "sgd" else 0.2
    opt = Optimizer([("x", x)], OptimConfig(algorithm=algorithm, lr=lr, clip_norm=None))
    losses = []
    for _ in range(150):
        with GradTape() as tape:
            diff = ag.sub(x, Tensor(target))
            loss = ag.sum_all(ag.mul(diff, diff))
            tape.backward(loss)
        losses.append(loss.item())
        opt.step()
        opt.zero_grad()
    if algorithm == "sgd":
        assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))
    assert losses[-1] < losses[0] / 10


def test_nan_gradient_aborts_with_parameter_name():
    p = Tensor([1.0], name="weights")
    p.grad = np.array([np.nan])
    opt = Optimizer([("bad_param", p)], OptimConfig())
    with pytest.raises(GradientError, match="bad_param"):
        opt.step()
    assert p.values[0] == 1.0  # untouched


def test_lr_decay():
    opt = Optimizer([], OptimConfig(lr=0.8, lr_decay=0.5))
    opt.decay_lr()
    assert opt.lr == pytest.approx(0.4)


def test_unknown_algorithm_rejected():
    with pytest.raises(ValueError):
        OptimConfig(algorithm="rmsprop")
