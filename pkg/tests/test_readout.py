import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from loopqrc.readout import (
    TrainedReadout,
    build_design_matrix,
    capacity,
    fit_readout,
    fit_readouts,
    normalized_mse,
    predict,
    pseudoinverse,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_design_matrix_single_row():
    assert np.array_equal(build_design_matrix([[2.0, 3.0]]), [[1.0, 2.0, 3.0]])


def test_design_matrix_shape(rng):
    V = build_design_matrix(rng.standard_normal((9, 4)))
    assert V.shape == (9, 5)
    assert np.all(V[:, 0] == 1.0)


def test_design_matrix_rejects_ragged():
    with pytest.raises(ValueError):
        build_design_matrix([[1.0, 2.0], [1.0]])
    with pytest.raises(ValueError):
        build_design_matrix(np.zeros((0, 3)))


def test_exact_linear_system():
    O = np.array([[1.0], [2.0], [3.0]])
    y = np.array([1.0, 2.0, 3.0])
    ro = fit_readout(build_design_matrix(O), y)
    assert np.allclose(predict(ro, O), y, atol=1e-12)
    assert np.allclose(ro.predict(O), y, atol=1e-12)


def test_synthetic_ground_truth(rng):
    O = rng.standard_normal((50, 9))
    V = build_design_matrix(O)
    w = rng.standard_normal(10)
    y = V @ w
    ro = fit_readout(V, y)
    assert np.mean((predict(ro, O) - y) ** 2) < 1e-20


def test_zero_weights_give_bias():
    ro = TrainedReadout(0.7, np.zeros(3))
    assert np.allclose(predict(ro, np.ones((4, 3))), 0.7)


def test_normalized_prediction_is_zscored(rng):
    O = rng.standard_normal((100, 3))
    y = 5 + 2 * O[:, 0]
    ro = fit_readout(build_design_matrix(O), y)
    z = predict(ro, O, normalized=True)
    assert np.allclose(z, (y - y.mean()) / y.std(), atol=1e-10)


def test_predict_width_mismatch():
    with pytest.raises(ValueError):
        predict(TrainedReadout(0.0, np.zeros(3)), np.ones((2, 4)))


def test_fit_errors(rng):
    V = build_design_matrix(rng.standard_normal((10, 2)))
    with pytest.raises(ValueError):
        fit_readout(V, np.ones(10))
    with pytest.raises(ValueError):
        fit_readout(V, np.arange(9.0))
    with pytest.raises(ValueError):
        TrainedReadout(0.0, np.zeros(1), 0.0, 0.0)


def test_pinv_matches_numpy(rng):
    V = rng.standard_normal((30, 6))
    assert np.allclose(pseudoinverse(V), np.linalg.pinv(V, rcond=1e-10))


def test_pinv_truncates_degenerate_columns(rng):
    a = rng.standard_normal((20, 1))
    V = np.hstack([np.ones((20, 1)), a, a])
    P = pseudoinverse(V)
    assert np.allclose(P @ V @ P, P)
    # the minimum-norm solution splits weight evenly between identical columns
    w = P @ (3 * a[:, 0])
    assert np.isclose(w[1], w[2])


def test_ridge_shrinks_weights(rng):
    V = build_design_matrix(rng.standard_normal((40, 5)))
    y = rng.standard_normal(40)
    plain = fit_readout(V, y)
    shrunk = fit_readout(V, y, ridge=10.0)
    assert np.linalg.norm(shrunk.weights) < np.linalg.norm(plain.weights)


def test_shared_pinv_equals_separate_fits(rng):
    V = build_design_matrix(rng.standard_normal((60, 4)))
    Y = rng.standard_normal((60, 3))
    joint = fit_readouts(V, Y)
    for j, ro in enumerate(joint):
        single = fit_readout(V, Y[:, j])
        assert np.isclose(ro.bias, single.bias)
        assert np.allclose(ro.weights, single.weights)


@given(seeds, st.integers(min_value=3, max_value=8))
def test_duplicate_column_never_increases_training_error(seed, k):
    rng = np.random.default_rng(seed)
    O = rng.standard_normal((40, k))
    y = rng.standard_normal(40)
    base = fit_readout(build_design_matrix(O), y)
    O2 = np.hstack([O, O[:, :1]])
    dup = fit_readout(build_design_matrix(O2), y)
    e1 = np.mean((predict(base, O) - y) ** 2)
    e2 = np.mean((predict(dup, O2) - y) ** 2)
    assert e2 <= e1 + 1e-12


def test_nmse_examples(rng):
    t = rng.standard_normal(200)
    assert normalized_mse(t, t) == pytest.approx(0.0, abs=1e-15)
    assert normalized_mse(2 * t + 3, t) == pytest.approx(0.0, abs=1e-12)
    assert normalized_mse(-t, t) == pytest.approx(4.0)


def test_nmse_target_normalised(rng):
    t = rng.standard_normal(500)
    assert normalized_mse(np.full(500, t.mean()), t, independent=False) == pytest.approx(1.0)
    assert normalized_mse(t + 0.1, t, independent=False) == pytest.approx(0.01 / t.var())


def test_nmse_rejects_bad_input():
    with pytest.raises(ValueError):
        normalized_mse(np.ones(3), np.arange(4.0))
    with pytest.raises(ValueError):
        normalized_mse(np.arange(3.0), np.ones(3))


@given(seeds)
def test_capacity_in_unit_interval(seed):
    rng = np.random.default_rng(seed)
    t = rng.standard_normal(50)
    y = rng.standard_normal(50) + rng.uniform(-2, 2) * t
    c = capacity(y, t)
    assert 0.0 <= c <= 1.0


def test_capacity_examples():
    rng = np.random.default_rng(17)
    t = rng.standard_normal(1000)
    assert capacity(t, t) == pytest.approx(1.0)
    assert capacity(-t, t) == 0.0
    noise = rng.standard_normal(1000)
    assert capacity(noise, t) < 0.05
    assert capacity(noise, t, independent=False) < 0.05
