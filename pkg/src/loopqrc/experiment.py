"""End-to-end runs of one crystal realization for each benchmark task."""

from __future__ import annotations

import numpy as np

from .analysis import RealizationResult, delay_cut, spectral_norm_decay
from .config import ExperimentConfig
from .readout import build_design_matrix, capacity, fit_readout, fit_readouts, normalized_mse, predict
from .reservoir import ReservoirConfig, draw_crystal, run_sequence
from .tasks import (
    MackeyGlassParams,
    autonomous_drive,
    embed_delay,
    forecast_target,
    gen_uniform_inputs,
    mackey_glass_series,
    narma10_target,
    valid_horizon,
)

DELAY_CUT_THRESHOLD = 0.9
# Delay 0 is skipped: the x-quadrature moments of a squeezed input depend on
# cos(2 phi) only, so the sign of the current sample is never visible.
DELAY_CUT_START = 1


def realization_streams(seed: int):
    """Independent generators for crystal, task data and readout noise."""
    crystal, data, noise = np.random.SeedSequence(seed).spawn(3)
    return (
        np.random.default_rng(crystal),
        np.random.default_rng(data),
        np.random.default_rng(noise),
    )


def reservoir_config(cfg: ExperimentConfig, seed: int) -> ReservoirConfig:
    return ReservoirConfig(N=cfg.N, R=cfg.R, r=cfg.r, r_input=cfg.r_input, m=cfg.m, crystal_seed=seed)


def _splits(cfg: ExperimentConfig):
    w, L, Lt = cfg.washout, cfg.train_len, cfg.test_len
    return slice(w, w + L), slice(w + L, w + L + Lt)


def _score(pred, target, independent=False):
    # task errors are MSE / Var(target): an uninformative readout scores ~1
    return normalized_mse(pred, target, independent=independent)


def run_memory(cfg, S, rcfg, data_rng, noise_rng) -> RealizationResult:
    total = cfg.washout + cfg.train_len + cfg.test_len
    s = gen_uniform_inputs(total, data_rng)
    O = run_sequence(s, rcfg, S, cfg.sigma2_noise, noise_rng)
    train, test = _splits(cfg)
    delays = range(cfg.task.d_max + 1)
    Y = np.stack([s[train.start - d : train.stop - d] for d in delays], axis=1)
    Yt = np.stack([s[test.start - d : test.stop - d] for d in delays], axis=1)
    V = build_design_matrix(O[train])
    readouts = fit_readouts(V, Y, ridge=cfg.ridge)
    rows, targets = (O[test], Yt) if cfg.capacity_split == "test" else (O[train], Y)
    caps = np.array([
        capacity(predict(ro, rows), targets[:, d]) for d, ro in enumerate(readouts)
    ])
    metrics = {
        "delay_cut": float(delay_cut(caps, DELAY_CUT_THRESHOLD, DELAY_CUT_START)),
        "total_capacity": float(caps.sum()),
    }
    metrics.update({f"capacity_d{d}": float(c) for d, c in enumerate(caps)})
    return RealizationResult(0, 0, metrics, {"capacity": caps, "inputs": s})


def run_narma10(cfg, S, rcfg, data_rng, noise_rng) -> RealizationResult:
    total = cfg.washout + cfg.train_len + cfg.test_len
    s = gen_uniform_inputs(total, data_rng)
    y, valid = narma10_target(s)
    O = run_sequence(s, rcfg, S, cfg.sigma2_noise, noise_rng)
    train, test = _splits(cfg)
    keep = valid[train]
    ro = fit_readout(build_design_matrix(O[train][keep]), y[train][keep], ridge=cfg.ridge)
    pred = predict(ro, O[test])
    return RealizationResult(0, 0, {
        "nmse": _score(pred, y[test]),
        "nmse_zscored": _score(pred, y[test], independent=True),
    }, {"inputs": s})


def run_mackey_glass(cfg, S, rcfg, data_rng, noise_rng) -> RealizationResult:
    t = cfg.task
    p = MackeyGlassParams(tau=t.tau, t_r=t.t_r, h=t.h, transient=t.transient, interpolation=t.interpolation)
    drive_len = cfg.washout + cfg.train_len + cfg.test_len
    s = mackey_glass_series(p, drive_len + t.autonomous_steps, data_rng)
    y, _ = forecast_target(s)
    O, runtime = run_sequence(s[:drive_len], rcfg, S, cfg.sigma2_noise, noise_rng, return_runtime=True)
    train, test = _splits(cfg)
    ro = fit_readout(build_design_matrix(O[train]), y[train], ridge=cfg.ridge)
    pred = predict(ro, O[test])
    truth = s[drive_len : drive_len + t.autonomous_steps]
    traj = autonomous_drive(
        ro, runtime, pred[-1], t.autonomous_steps, cfg.sigma2_noise, noise_rng,
        signal_range=float(np.ptp(s[train])),
    )
    fed = traj[: runtime.state.step_index - drive_len]
    metrics = {
        "one_step_nmse": _score(pred, y[test]),
        "valid_horizon": float(valid_horizon(traj, truth, t.theta)),
        "autonomous_length": float(len(traj)),
    }
    return RealizationResult(0, 0, metrics, {
        "truth": truth,
        "prediction": traj,
        "inputs": np.concatenate([s[:drive_len], fed]),
        "attractor": embed_delay(traj, t.attractor_lag) if len(traj) > t.attractor_lag else np.empty((0, 2)),
    })


TASK_RUNNERS = {
    "memory": run_memory,
    "narma10": run_narma10,
    "mackey_glass": run_mackey_glass,
}


def run_realization(cfg: ExperimentConfig, index: int, seed: int) -> RealizationResult:
    """One crystal draw and, unless the task is ``spectral_norm``, one full task run."""
    crystal_rng, data_rng, noise_rng = realization_streams(seed)
    rcfg = reservoir_config(cfg, seed)
    S = draw_crystal(rcfg, crystal_rng, cfg.max_crystal_attempts)
    d_norm = cfg.task.d_max if cfg.task.kind in ("memory", "spectral_norm") else 40
    norms = spectral_norm_decay(S, cfg.R, d_norm)
    if cfg.task.kind == "spectral_norm":
        res = RealizationResult(index, seed, {f"norm_d{d}": float(v) for d, v in enumerate(norms)})
    else:
        res = TASK_RUNNERS[cfg.task.kind](cfg, S, rcfg, data_rng, noise_rng)
    res.index, res.seed = index, seed
    res.extras["spectral_norm"] = norms
    res.extras["crystal"] = S
    res.extras["rho"] = float(np.max(np.abs(np.linalg.eigvals(np.sqrt(cfg.R) * S))))
    return res
