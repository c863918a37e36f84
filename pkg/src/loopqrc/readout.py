"""Linear readout: design matrix, pseudoinverse fit, prediction and scores."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PINV_RCOND = 1e-10


def build_design_matrix(observables) -> np.ndarray:
    """Prepend a column of ones to the observable rows."""
    try:
        O = np.asarray(observables, dtype=float)
    except ValueError as exc:
        raise ValueError("observable rows have inconsistent widths") from exc
    if O.ndim != 2 or O.shape[0] < 1:
        raise ValueError("expected a non-empty 2-D array of observable rows")
    return np.hstack([np.ones((O.shape[0], 1)), O])


def pseudoinverse(V: np.ndarray, rcond: float = PINV_RCOND, ridge: float = 0.0) -> np.ndarray:
    """Moore-Penrose inverse from a truncated SVD.

    Singular values below ``rcond * s_max`` are discarded. ``ridge > 0``
    replaces 1/s by s/(s^2 + ridge) (off by default).
    """
    U, s, Vt = np.linalg.svd(V, full_matrices=False)
    keep = s > rcond * s[0] if s.size else s.astype(bool)
    if ridge > 0:
        inv = np.where(keep, s / (s**2 + ridge), 0.0)
    else:
        inv = np.zeros_like(s)
        inv[keep] = 1.0 / s[keep]
    return (Vt.T * inv) @ U.T


@dataclass
class TrainedReadout:
    bias: float
    weights: np.ndarray
    target_mean: float = 0.0
    target_std: float = 1.0

    def __post_init__(self):
        if not self.target_std > 0:
            raise ValueError("target_std must be positive")

    def predict(self, observables, *, normalized: bool = False) -> np.ndarray:
        return predict(self, observables, normalized=normalized)


def _zscore_params(y: np.ndarray) -> tuple[float, float]:
    mu = float(np.mean(y))
    sd = float(np.std(y))
    if not sd > 1e-12 * max(1.0, abs(mu)):
        raise ValueError("target has zero variance")
    return mu, sd


def fit_readouts(V: np.ndarray, targets: np.ndarray, *, pinv=None, ridge: float = 0.0):
    """Fit one readout per target column sharing a single pseudoinverse of V."""
    V = np.asarray(V, dtype=float)
    Y = np.asarray(targets, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if V.shape[0] != Y.shape[0]:
        raise ValueError(f"design has {V.shape[0]} rows but targets have {Y.shape[0]}")
    if V.shape[0] < 2:
        raise ValueError("need at least two training rows")
    params = [_zscore_params(Y[:, j]) for j in range(Y.shape[1])]
    mu = np.array([p[0] for p in params])
    sd = np.array([p[1] for p in params])
    if pinv is None:
        pinv = pseudoinverse(V, ridge=ridge)
    W = pinv @ ((Y - mu) / sd)
    return [TrainedReadout(float(W[0, j]), W[1:, j].copy(), mu[j], sd[j]) for j in range(W.shape[1])]


def fit_readout(V: np.ndarray, targets, *, ridge: float = 0.0) -> TrainedReadout:
    """Least-squares readout for z-scored targets on design matrix V."""
    return fit_readouts(V, np.asarray(targets, dtype=float), ridge=ridge)[0]


def predict(readout: TrainedReadout, observables, *, normalized: bool = False) -> np.ndarray:
    """Affine readout ``w0 + O @ w``; de-normalized to target units unless ``normalized``."""
    O = np.asarray(observables, dtype=float)
    if O.shape[-1] != readout.weights.shape[0]:
        raise ValueError(
            f"observable width {O.shape[-1]} does not match {readout.weights.shape[0]} weights"
        )
    y = readout.bias + O @ readout.weights
    if normalized:
        return y
    return readout.target_mean + readout.target_std * y


def _zscore(y: np.ndarray) -> np.ndarray:
    mu, sd = _zscore_params(y)
    return (y - mu) / sd


def normalized_mse(y, y_target, *, independent: bool = True) -> float:
    """MSE between z-scored series.

    With ``independent=True`` each series is z-scored with its own mean and
    standard deviation, so the score is invariant to positive-affine maps of
    either argument and ranges over [0, 4]. With ``independent=False`` both
    series are z-scored with the target's statistics, i.e. ``MSE / Var(target)``;
    an uninformative prediction then scores about 1.
    """
    y = np.asarray(y, dtype=float)
    t = np.asarray(y_target, dtype=float)
    if y.shape != t.shape or y.ndim != 1 or y.size < 2:
        raise ValueError("series must be 1-D with equal length >= 2")
    if independent:
        return float(np.mean((_zscore(y) - _zscore(t)) ** 2))
    mu, sd = _zscore_params(t)
    return float(np.mean((y - t) ** 2)) / sd**2


def capacity(y, y_target, *, independent: bool = True) -> float:
    return max(0.0, 1.0 - normalized_mse(y, y_target, independent=independent))
