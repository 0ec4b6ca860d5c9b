import numpy as np
import pytest

from towerbench.errors import ConfigError, NonFiniteError
from towerbench.optim import SGD, Adam, ScheduleConfig, lr_at, one_cycle_lr, warmup_linear_lr
from towerbench.tensor import Tensor

pytestmark = pytest.mark.usefixtures("f64")


def _param(value, grad):
    p = Tensor(np.asarray(value, dtype=np.float64), requires_grad=True)
    p.grad = np.asarray(grad, dtype=np.float64)
    return p


# ── Schedules ────────────────────────────────────────────────


def test_one_cycle_pinned_values():
    cfg = ScheduleConfig(total_steps=1000, max_lr=0.01)
    assert one_cycle_lr(300, cfg) == pytest.approx(0.01, abs=1e-15)
    assert one_cycle_lr(0, cfg) == pytest.approx(4e-4, abs=1e-15)
    assert one_cycle_lr(1000, cfg) == pytest.approx(1e-6, abs=1e-15)


def test_one_cycle_rises_then_falls():
    cfg = ScheduleConfig(total_steps=200, max_lr=0.01)
    values = [one_cycle_lr(s, cfg) for s in range(201)]
    assert all(a <= b for a, b in zip(values[:60], values[1:61]))
    assert all(a >= b for a, b in zip(values[60:-1], values[61:]))


def test_warmup_linear_pinned_values():
    cfg = ScheduleConfig(total_steps=1000, kind="warmup_linear", max_lr=1e-4)
    assert warmup_linear_lr(150, cfg) == pytest.approx(5e-5, abs=1e-18)
    assert warmup_linear_lr(300, cfg) == pytest.approx(1e-4, abs=1e-18)
    assert warmup_linear_lr(650, cfg) == pytest.approx(5e-5, abs=1e-18)
    assert warmup_linear_lr(0, cfg) == 0.0
    assert warmup_linear_lr(1000, cfg) == 0.0


def test_lr_at_dispatches_on_kind():
    linear = ScheduleConfig(total_steps=1000, kind="warmup_linear", max_lr=1e-4)
    cycle = ScheduleConfig(total_steps=1000, max_lr=0.01)
    assert lr_at(150, linear) == warmup_linear_lr(150, linear)
    assert lr_at(150, cycle) == one_cycle_lr(150, cycle)


def test_schedule_rejects_out_of_range_step():
    cfg = ScheduleConfig(total_steps=10)
    with pytest.raises(ValueError):
        one_cycle_lr(11, cfg)
    with pytest.raises(ValueError):
        warmup_linear_lr(-1, cfg)


def test_schedule_config_collects_errors():
    with pytest.raises(ConfigError) as info:
        ScheduleConfig(total_steps=0, kind="step", max_lr=-1.0, warmup_fraction=1.0)
    assert len(info.value.errors) == 4


# ── SGD ──────────────────────────────────────────────────────


def test_sgd_plain_step():
    p = _param([1.0], [2.0])
    SGD([p], momentum=0.0).step(0.1)
    assert p.data[0] == pytest.approx(0.8)


def test_sgd_momentum_recurrence():
    p = _param([0.0], [1.0])
    opt = SGD([p], momentum=0.9)
    opt.step(1.0)
    assert p.data[0] == pytest.approx(-1.0)
    p.grad = np.array([1.0])
    opt.step(1.0)
    assert p.data[0] == pytest.approx(-2.9)


def test_sgd_zero_lr_leaves_params():
    p = _param([3.0, -1.0], [5.0, 5.0])
    SGD([p], weight_decay=0.1).step(0.0)
    assert p.data.tolist() == [3.0, -1.0]


def test_sgd_weight_decay_joins_the_gradient():
    p = _param([2.0], [0.0])
    SGD([p], momentum=0.0, weight_decay=0.5).step(0.1)
    assert p.data[0] == pytest.approx(1.9)


def test_sgd_converges_on_a_quadratic():
    for lr in (0.1, 0.5, 1.0, 1.5, 1.9):
        p = _param([4.0], [4.0])
        opt = SGD([p], momentum=0.0)
        previous = abs(p.data[0])
        for _ in range(100):
            p.grad = p.data.copy()
            opt.step(lr)
            assert abs(p.data[0]) <= previous
            previous = abs(p.data[0])
        assert previous < 1e-2


# ── Adam ─────────────────────────────────────────────────────


@pytest.mark.parametrize("g", [1e-3, 0.5, 250.0])
def test_adam_first_step_moves_by_lr(g):
    p = _param([0.0], [g])
    Adam([p], weight_decay=0.0).step(0.01)
    assert p.data[0] == pytest.approx(-0.01, rel=1e-4)


def test_adam_zero_lr_still_updates_moments():
    p = _param([1.0], [2.0])
    opt = Adam([p], weight_decay=0.0)
    opt.step(0.0)
    assert p.data[0] == 1.0
    assert opt.m[0][0] == pytest.approx(0.2)
    assert opt.v[0][0] == pytest.approx(0.004)
    assert opt.t == 1


def test_adam_weight_decay_enters_as_l2():
    p = _param([1.0], [0.0])
    opt = Adam([p], weight_decay=0.01)
    opt.step(0.0)
    assert opt.m[0][0] == pytest.approx(0.1 * 0.01)


# ── Failure modes ────────────────────────────────────────────


def test_non_finite_gradient_rejects_the_step():
    p = _param([1.0, 2.0], [np.nan, 0.0])
    with pytest.raises(NonFiniteError):
        SGD([p]).step(0.1)
    assert p.data.tolist() == [1.0, 2.0]


def test_negative_lr_is_rejected():
    with pytest.raises(ValueError):
        SGD([_param([1.0], [1.0])]).step(-0.1)


def test_missing_grad_counts_as_zero():
    p = Tensor(np.ones(2), requires_grad=True)
    SGD([p], momentum=0.0).step(1.0)
    assert p.data.tolist() == [1.0, 1.0]
