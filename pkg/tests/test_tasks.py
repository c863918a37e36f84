import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from loopqrc import _core
from loopqrc.readout import TrainedReadout
from loopqrc.reservoir import ReservoirConfig, ReservoirRuntime, draw_crystal
from loopqrc.tasks import (
    DivergenceError,
    MackeyGlassParams,
    autonomous_drive,
    delay_target,
    embed_delay,
    forecast_target,
    gen_uniform_inputs,
    mackey_glass_grid,
    mackey_glass_series,
    narma10_target,
    valid_horizon,
)


def test_uniform_inputs_moments():
    s = gen_uniform_inputs(100_000, np.random.default_rng(0))
    assert s.min() >= -1 and s.max() <= 1
    assert abs(s.mean()) < 0.02
    assert abs(s.var() - 1 / 3) < 0.01


def test_uniform_inputs_use_passed_stream():
    a = gen_uniform_inputs(10, np.random.default_rng(5))
    b = gen_uniform_inputs(10, np.random.default_rng(5))
    assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        gen_uniform_inputs(0, np.random.default_rng(0))


def test_delay_target():
    s = np.array([1.0, 2.0, 3.0])
    y, ok = delay_target(s, 0)
    assert np.array_equal(y, s) and ok.all()
    y, ok = delay_target(s, 1)
    assert np.array_equal(y[ok], [1.0, 2.0])
    assert list(ok) == [False, True, True]
    with pytest.raises(ValueError):
        delay_target(s, 3)


def test_forecast_target():
    s = np.array([1.0, 2.0, 3.0])
    y, ok = forecast_target(s)
    assert np.array_equal(y[ok], [2.0, 3.0])
    assert ok.sum() == len(s) - 1
    # forecast followed by a one-step delay gives the series back
    back, ok2 = delay_target(y, 1)
    assert np.array_equal(back[1:][ok[:-1]], s[1:])
    with pytest.raises(ValueError):
        forecast_target([1.0])


def test_narma_zero_input_by_hand():
    y, ok = narma10_target(np.zeros(20))
    assert np.all(y[:10] == 0) and not ok[:10].any() and ok[10:].all()
    assert y[10] == pytest.approx(0.1)
    assert y[11] == pytest.approx(0.1305)


def test_narma_zero_input_fixed_point():
    y, _ = narma10_target(np.zeros(3000))
    assert y[-1] == pytest.approx(0.7 - np.sqrt(0.29), abs=1e-10)


def _narma_reference(s):
    u = 0.2 * np.asarray(s)
    y = [0.0] * 10
    for k in range(10, len(u)):
        y.append(
            0.3 * y[k - 1]
            + 0.05 * y[k - 1] * sum(y[k - i] for i in range(1, 11))
            + 1.5 * u[k - 1] * u[k - 10]
            + 0.1
        )
    return np.array(y)


@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_narma_matches_reference(seed):
    s = np.random.default_rng(seed).uniform(-1, 1, 300)
    y, _ = narma10_target(s)
    assert np.allclose(y, _narma_reference(s), rtol=1e-13, atol=0)
    assert np.array_equal(y, narma10_target(s.copy())[0])


def test_narma_divergence_guard():
    with pytest.raises(DivergenceError):
        narma10_target(np.full(200, 40.0))


def test_mackey_glass_fixed_point_is_exact():
    p = MackeyGlassParams(history=1.0)
    assert np.all(mackey_glass_series(p, 200) == 1.0)


@pytest.mark.parametrize("kw", [dict(h=0.07), dict(h=0.2), dict(t_r=3.05), dict(transient=-1), dict(interpolation="cubic")])
def test_mackey_glass_param_validation(kw):
    with pytest.raises(ValueError):
        MackeyGlassParams(**kw)


def test_mackey_glass_needs_rng_for_random_history():
    with pytest.raises(ValueError):
        mackey_glass_series(MackeyGlassParams(), 10)


def test_mackey_glass_bounding_box():
    s = mackey_glass_series(MackeyGlassParams(), 2000, np.random.default_rng(1))
    assert 0.2 < s.min() and s.max() < 1.5
    assert s.std() > 0.1  # not collapsed onto a fixed point


def _mg_reference(x0, t_end, h):
    # RK4 with the delayed term read by linear interpolation on a fine grid
    lag = int(round(17.0 / h))
    f = lambda x, xd: -0.1 * x + 0.2 * xd / (1.0 + xd**10)
    xs = [x0]
    delayed = lambda j: x0 if j < 0 else xs[j]
    for n in range(int(round(t_end / h))):
        d0, d1 = delayed(n - lag), delayed(n + 1 - lag)
        dm = 0.5 * (d0 + d1)
        x = xs[-1]
        k1 = f(x, d0)
        k2 = f(x + 0.5 * h * k1, dm)
        k3 = f(x + 0.5 * h * k2, dm)
        k4 = f(x + h * k3, d1)
        xs.append(x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4))
    return np.array(xs)


def test_mackey_glass_against_fine_oracle():
    ref = _mg_reference(1.2, 100.0, 0.002)[::50]
    p = MackeyGlassParams(history=1.2, transient=0.0)
    got = mackey_glass_grid(p, 1000, 1.2)
    assert np.max(np.abs(got - ref)) < 1e-3


def test_mackey_glass_step_halving():
    a = mackey_glass_series(MackeyGlassParams(history=0.9, transient=0.0), 100)
    b = mackey_glass_series(MackeyGlassParams(history=0.9, transient=0.0, h=0.05), 100)
    assert np.max(np.abs(a - b)) < 1e-4


def test_mackey_glass_is_chaotic():
    p = MackeyGlassParams(transient=0.0)
    a = mackey_glass_series(MackeyGlassParams(history=1.1, transient=0.0), 1000)
    b = mackey_glass_series(MackeyGlassParams(history=1.1 + 1e-6, transient=0.0), 1000)
    assert np.max(np.abs(a[:20] - b[:20])) < 1e-4
    assert np.max(np.abs(a - b)) > 0.1
    assert p.tau == 17.0


@pytest.mark.parametrize("interp", ["hermite", "linear"])
def test_mackey_glass_backends_identical(interp):
    if _core._kernels is None:
        pytest.skip("compiled extension not built")
    p = MackeyGlassParams(interpolation=interp)
    a = mackey_glass_grid(p, 5000, 0.8, backend="python")
    b = mackey_glass_grid(p, 5000, 0.8, backend="cython")
    assert np.array_equal(a, b)


def test_valid_horizon_examples():
    t = np.sin(np.linspace(0, 10, 50))
    assert valid_horizon(t, t) == 50
    bad = t.copy()
    bad[0] += 1.0
    assert valid_horizon(bad, t) == 0
    step = t.copy()
    step[7:] += 2 * 0.3 * np.std(t)
    assert valid_horizon(step, t, 0.3) == 7


def test_embed_delay():
    y = np.arange(10.0)
    e = embed_delay(y, 6)
    assert e.shape == (4, 2)
    assert np.array_equal(e[0], [6.0, 0.0])


def _runtime():
    cfg = ReservoirConfig(N=2, R=0.5, r=0.3, m=1.0)
    return ReservoirRuntime(cfg, draw_crystal(cfg, np.random.default_rng(0)))


def test_autonomous_with_oracle_predictor():
    truth = mackey_glass_series(MackeyGlassParams(), 60, np.random.default_rng(2))
    k = iter(range(1, 60))
    traj = autonomous_drive(lambda row: truth[next(k)], _runtime(), truth[0], 60)
    assert np.array_equal(traj, truth)


def test_autonomous_with_constant_readout():
    ro = TrainedReadout(0.0, np.zeros(7), target_mean=0.9, target_std=0.2)
    traj = autonomous_drive(ro, _runtime(), 0.9, 25, 0.01, np.random.default_rng(0))
    assert np.allclose(traj, 0.9)
    assert len(traj) == 25


def test_autonomous_divergence_guard():
    vals = iter([1.0, 2.0, 500.0, 1.0])
    traj = autonomous_drive(lambda row: next(vals), _runtime(), 0.5, 10, signal_range=1.0)
    assert list(traj) == [0.5, 1.0, 2.0]
