"""Memory-decay analysis and ensemble statistics over crystal realizations."""

from __future__ import annotations

import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

MASK64 = (1 << 64) - 1
NORM_OVERFLOW = 1e150


def spectral_norm_decay(S: np.ndarray, R: float, d_max: int) -> np.ndarray:
    """``||A^d||_2`` for ``d = 0..d_max`` with ``A = sqrt(R) S``, by repeated products."""
    if d_max < 0:
        raise ValueError("d_max must be >= 0")
    A = np.sqrt(R) * np.asarray(S, dtype=float)
    P = np.eye(A.shape[0])
    norms = np.empty(d_max + 1)
    for d in range(d_max + 1):
        norms[d] = np.linalg.norm(P, 2)
        if norms[d] > NORM_OVERFLOW:
            raise OverflowError(f"||A^{d}|| exceeded {NORM_OVERFLOW:g}; rho(A) >= 1?")
        P = A @ P
    return norms


def delay_cut(capacities: Sequence[float], threshold: float = 0.9, start: int = 0) -> int:
    """Smallest delay ``d >= start`` with ``C(d) < threshold``; ``len(capacities)`` if none."""
    c = np.asarray(capacities, dtype=float)
    if c.size == 0:
        raise ValueError("empty capacity curve")
    below = np.flatnonzero(c[start:] < threshold)
    return int(start + below[0]) if below.size else len(c)


def splitmix64(x: int) -> int:
    """SplitMix64 output function (Steele, Lea & Flood finaliser)."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def realization_seed(master_seed: int, index: int) -> int:
    return splitmix64((int(master_seed) + int(index)) & MASK64)


@dataclass
class MetricSummary:
    mean: float
    std: float
    median: float
    q10: float
    q90: float
    count: int

    @classmethod
    def from_values(cls, values) -> "MetricSummary":
        v = np.asarray(values, dtype=float)
        if v.size == 0:
            raise ValueError("cannot summarise an empty sample")
        q10, med, q90 = np.quantile(v, [0.1, 0.5, 0.9])
        return cls(float(v.mean()), float(v.std()), float(med), float(q10), float(q90), int(v.size))


@dataclass
class RealizationResult:
    index: int
    seed: int
    metrics: dict[str, float] = field(default_factory=dict)
    extras: dict[str, Any] = field(default_factory=dict)
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class EnsembleSummary:
    coords: dict[str, Any]
    realizations: list[RealizationResult]
    metrics: dict[str, MetricSummary]

    @property
    def failures(self) -> list[RealizationResult]:
        return [r for r in self.realizations if not r.ok]

    @property
    def n_ok(self) -> int:
        return sum(r.ok for r in self.realizations)


def summarize(coords: dict, results: list[RealizationResult]) -> EnsembleSummary:
    """Deterministic reduction over index-sorted realizations."""
    results = sorted(results, key=lambda r: r.index)
    names: list[str] = []
    for r in results:
        for k in r.metrics:
            if k not in names:
                names.append(k)
    metrics = {}
    for name in names:
        vals = [r.metrics[name] for r in results if r.ok and name in r.metrics]
        if vals:
            metrics[name] = MetricSummary.from_values(vals)
    return EnsembleSummary(dict(coords), results, metrics)


def _guarded(fn, payload, index, seed) -> RealizationResult:
    with threadpool_limits(limits=1):
        try:
            res = fn(payload, index, seed)
        except Exception as exc:  # recorded per realization, never dropped
            msg = f"{type(exc).__name__}: {exc}"
            return RealizationResult(index, seed, error=msg, extras={"traceback": traceback.format_exc()})
    res.index, res.seed = index, seed
    return res


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get("QRC_THREADS", "1") or 1)
    return max(1, int(threads))


def run_ensemble(
    fn: Callable[[Any, int, int], RealizationResult],
    payload: Any,
    n_realizations: int,
    master_seed: int,
    *,
    coords: dict | None = None,
    threads: int | None = None,
) -> EnsembleSummary:
    """Run ``fn(payload, index, seed)`` for every realization and summarise.

    ``fn`` must be a module-level function when ``threads > 1`` (realizations
    run in worker processes). Results do not depend on the worker count.
    """
    if n_realizations < 1:
        raise ValueError("n_realizations must be >= 1")
    seeds = [realization_seed(master_seed, i) for i in range(n_realizations)]
    workers = min(resolve_threads(threads), n_realizations)
    if workers == 1:
        results = [_guarded(fn, payload, i, s) for i, s in enumerate(seeds)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_guarded, fn, payload, i, s) for i, s in enumerate(seeds)]
            results = [f.result() for f in futures]
    return summarize(coords or {}, results)
