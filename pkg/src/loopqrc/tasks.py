"""Benchmark tasks: input streams, targets, Mackey-Glass series and closed-loop driving."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _core
from .readout import TrainedReadout, predict

NARMA_COEFFS = (0.3, 0.05, 1.5, 0.1)
NARMA_INPUT = (0.0, 0.2)
NARMA_ORDER = 10
NARMA_BLOWUP = 10.0


class DivergenceError(RuntimeError):
    pass


def gen_uniform_inputs(L_total: int, rng: np.random.Generator) -> np.ndarray:
    if L_total < 1:
        raise ValueError("sequence length must be >= 1")
    return rng.uniform(-1.0, 1.0, size=int(L_total))


def delay_target(s, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Target ``y_k = s_{k-d}`` and a validity mask (first ``d`` entries invalid)."""
    s = np.asarray(s, dtype=float)
    if d < 0 or d >= len(s):
        raise ValueError(f"delay must satisfy 0 <= d < {len(s)}, got {d}")
    y = np.full(len(s), np.nan)
    y[d:] = s[: len(s) - d]
    valid = np.zeros(len(s), dtype=bool)
    valid[d:] = True
    return y, valid


def narma10_target(s) -> tuple[np.ndarray, np.ndarray]:
    """NARMA10 recursion driven by ``u = 0.2 s``; the first 10 entries are zero and invalid."""
    s = np.asarray(s, dtype=float)
    n = NARMA_ORDER
    if len(s) <= n:
        raise ValueError(f"NARMA10 needs more than {n} samples")
    alpha, beta, gamma, delta = NARMA_COEFFS
    mu, nu = NARMA_INPUT
    u = mu + nu * s
    y = np.zeros(len(s))
    for k in range(n, len(s)):
        prev = y[k - 1]
        y[k] = (
            alpha * prev
            + beta * prev * y[k - n : k].sum()
            + gamma * u[k - 1] * u[k - n]
            + delta
        )
        if abs(y[k]) > NARMA_BLOWUP:
            raise DivergenceError(f"NARMA10 diverged at step {k} (y={y[k]:.3g})")
    valid = np.ones(len(s), dtype=bool)
    valid[:n] = False
    return y, valid


def forecast_target(s) -> tuple[np.ndarray, np.ndarray]:
    """One-step-ahead target ``y_k = s_{k+1}``; the last entry is invalid."""
    s = np.asarray(s, dtype=float)
    if len(s) < 2:
        raise ValueError("forecasting needs at least two samples")
    y = np.full(len(s), np.nan)
    y[:-1] = s[1:]
    valid = np.ones(len(s), dtype=bool)
    valid[-1] = False
    return y, valid


@dataclass(frozen=True)
class MackeyGlassParams:
    tau: float = 17.0
    t_r: float = 3.0
    h: float = 0.1
    transient: float = 1000.0
    history: float | None = None  # constant initial history; random in [0.5, 1.5] if None
    beta: float = 0.2
    gamma: float = 0.1
    power: float = 10.0
    interpolation: str = "hermite"  # delayed value at half steps: "hermite" or "linear"

    def __post_init__(self):
        if self.interpolation not in ("hermite", "linear"):
            raise ValueError(f"unknown interpolation {self.interpolation!r}")
        lag = self.tau / self.h
        every = self.t_r / self.h
        if not 0 < self.h <= 0.1:
            raise ValueError(f"integrator step must be in (0, 0.1], got {self.h}")
        if abs(lag - round(lag)) > 1e-9 or round(lag) < 1:
            raise ValueError("tau / h must be a positive integer")
        if abs(every - round(every)) > 1e-9 or round(every) < 1:
            raise ValueError("t_r / h must be a positive integer")
        if self.transient < 0:
            raise ValueError("transient must be >= 0")


def mackey_glass_grid(
    p: MackeyGlassParams, n_steps: int, history: float, *, backend: str | None = None
) -> np.ndarray:
    """RK4 solution on the grid ``t = 0, h, ..., n_steps h`` from a constant history."""
    lag = int(round(p.tau / p.h))
    x = _core.mackey_glass_grid(
        history, n_steps, lag, p.h, p.beta, p.gamma, p.power,
        p.interpolation == "hermite", backend,
    )
    if not np.all(np.isfinite(x)):
        raise DivergenceError("Mackey-Glass integration produced non-finite values")
    return x


def mackey_glass_series(
    p: MackeyGlassParams, L_total: int, rng: np.random.Generator | None = None
) -> np.ndarray:
    """Sampled Mackey-Glass series ``s_k = s(t_0 + k t_r)`` after the transient."""
    if p.history is None:
        if rng is None:
            raise ValueError("rng is required for a random initial history")
        history = rng.uniform(0.5, 1.5)
    else:
        history = p.history
    every = int(round(p.t_r / p.h))
    skip = int(round(p.transient / p.h))
    grid = mackey_glass_grid(p, skip + every * (L_total - 1), history)
    return grid[skip::every][:L_total]


def _as_predictor(readout):
    if isinstance(readout, TrainedReadout):
        return lambda row: float(predict(readout, row))
    return readout


def autonomous_drive(
    readout,
    runtime,
    first_input: float,
    steps: int,
    sigma2: float = 0.0,
    rng: np.random.Generator | None = None,
    *,
    signal_range: float | None = None,
) -> np.ndarray:
    """Closed-loop forecasting: each prediction is fed back as the next input.

    ``first_input`` is the forecast produced from the last teacher-forced step;
    it is the first element of the returned trajectory. ``runtime`` is a
    :class:`~loopqrc.reservoir.ReservoirRuntime` and is advanced in place.
    ``readout`` is a TrainedReadout or any callable mapping an observable
    row to the task-space prediction. If ``signal_range`` is given the drive
    stops early once a prediction leaves ten times that range, and the
    trajectory is truncated there.
    """
    predictor = _as_predictor(readout)
    traj = [float(first_input)]
    for _ in range(steps - 1):
        obs = runtime.drive([traj[-1]], sigma2, rng)[0]
        nxt = float(predictor(obs))
        if not np.isfinite(nxt) or (
            signal_range is not None and abs(nxt) > 10.0 * signal_range
        ):
            break
        traj.append(nxt)
    return np.asarray(traj[:steps])


def valid_horizon(predicted, truth, theta: float = 0.3) -> int:
    """Number of leading steps with ``|pred - truth| <= theta * std(truth)``."""
    predicted = np.asarray(predicted, dtype=float)
    truth = np.asarray(truth, dtype=float)
    n = min(len(predicted), len(truth))
    bad = np.abs(predicted[:n] - truth[:n]) > theta * np.std(truth)
    return int(np.argmax(bad)) if bad.any() else n


def embed_delay(y, lag: int = 6) -> np.ndarray:
    """Pairs ``(y_k, y_{k-lag})`` for attractor plots."""
    y = np.asarray(y, dtype=float)
    return np.column_stack([y[lag:], y[:-lag]])
