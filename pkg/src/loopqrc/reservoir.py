"""Loop dynamics of the photonic reservoir at the covariance level.

One time step couples the input pulse to the loop pulse on a beam splitter of
reflectivity R, sends one output to the homodyne detector and passes the other
through the crystal S:

    Q_out   = sqrt(1 - R) Q_loop - sqrt(R) Q_in
    Q_loop' = S (sqrt(R) Q_loop + sqrt(1 - R) Q_in)

Loop and input pulses are independent and zero-mean, so the cross terms
vanish and only covariances need to be propagated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _core
from .gaussian import (
    check_physical,
    compose_crystal,
    squeezed_vacuum_covariance,
    vacuum_covariance,
    wick_fourth_moments,
)

MAX_CRYSTAL_ATTEMPTS = 100
ECHO_STATE_MARGIN = 1e-9


class EchoStateError(RuntimeError):
    """No crystal draw satisfied rho(sqrt(R) S) < 1."""


@dataclass(frozen=True)
class ReservoirConfig:
    N: int = 8
    R: float = 0.75
    r: float = 0.0
    r_input: float = 2.0
    m: float = 0.25
    crystal_seed: int = 0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")
        if not 0.0 <= self.R <= 1.0:
            raise ValueError(f"R must lie in [0, 1], got {self.R!r}")
        if self.r < 0 or self.r_input < 0:
            raise ValueError("squeezing strengths must be non-negative")
        if not np.isfinite(self.m):
            raise ValueError("encoding slope must be finite")

    @property
    def n_observables(self) -> int:
        return observable_count(self.N)


@dataclass
class LoopState:
    covariance: np.ndarray
    step_index: int = 0

    @classmethod
    def vacuum(cls, N: int) -> "LoopState":
        return cls(vacuum_covariance(N), 0)


def observable_count(N: int) -> int:
    return N * (3 * N + 1) // 2


def encode_input(s: float, m: float) -> float:
    if not np.isfinite(s):
        raise ValueError(f"input sample must be finite, got {s!r}")
    return m * np.pi * s


def loop_step(
    state: LoopState,
    gamma_in: np.ndarray,
    cfg: ReservoirConfig,
    S: np.ndarray,
    *,
    validate: bool = True,
) -> tuple[LoopState, np.ndarray]:
    """Advance the loop by one pulse. Returns the new state and the output covariance."""
    G = state.covariance
    n2 = 2 * cfg.N
    if G.shape != (n2, n2) or gamma_in.shape != (n2, n2) or S.shape != (n2, n2):
        raise ValueError(f"expected {n2}x{n2} matrices for N={cfg.N}")
    if validate:
        check_physical(G)
        check_physical(gamma_in)
    R = cfg.R
    new = S @ (R * G + (1.0 - R) * gamma_in) @ S.T
    new = 0.5 * (new + new.T)
    out = (1.0 - R) * G + R * gamma_in
    return LoopState(new, state.step_index + 1), out


def expanded_covariance_oracle(
    input_history: list[np.ndarray],
    cfg: ReservoirConfig,
    S: np.ndarray,
    d_max: int,
) -> np.ndarray:
    """Loop covariance after the last input, from the truncated delay expansion.

    ``input_history[-1]`` is the most recent input covariance; term ``d`` uses
    ``input_history[-1 - d]`` propagated by ``A^d`` with ``A = sqrt(R) S``.
    """
    if d_max < 0 or len(input_history) < d_max + 1:
        raise ValueError(
            f"need at least {d_max + 1} input covariances, got {len(input_history)}"
        )
    A = np.sqrt(cfg.R) * S
    acc = np.zeros_like(S, dtype=float)
    Ad = np.eye(S.shape[0])
    for d in range(d_max + 1):
        acc += Ad @ input_history[-1 - d] @ Ad.T
        Ad = A @ Ad
    return (1.0 - cfg.R) * S @ acc @ S.T


def _triu_rows(N: int):
    iu = np.triu_indices(N)
    iu_strict = np.triu_indices(N, 1)
    return iu, iu_strict


def observables_from_xx(gxx: np.ndarray) -> np.ndarray:
    """Observable vectors from x-x blocks; accepts (N, N) or (L, N, N)."""
    g = np.asarray(gxx, dtype=float)
    single = g.ndim == 2
    if single:
        g = g[None]
    N = g.shape[-1]
    iu, ius = _triu_rows(N)
    d = np.diagonal(g, axis1=1, axis2=2)
    second = g[:, iu[0], iu[1]]
    quad = d[:, iu[0]] * d[:, iu[1]] + 2.0 * second**2
    cubic = 3.0 * d[:, ius[0]] * g[:, ius[0], ius[1]]
    obs = np.concatenate([second, quad, cubic], axis=1)
    return obs[0] if single else obs


def extract_observables(gamma_out: np.ndarray, *, validate: bool = True) -> np.ndarray:
    """Homodyne moments of the out-coupled pulse in canonical order.

    ``<x_i x_j>`` (i <= j), ``<x_i^2 x_j^2>`` (i <= j), ``<x_i^3 x_j>`` (i < j),
    each block row-major over the upper triangle.
    """
    if validate:
        check_physical(gamma_out)
    gxx = np.asarray(gamma_out)[0::2, 0::2]
    N = gxx.shape[0]
    iu, ius = _triu_rows(N)
    quad, cubic = wick_fourth_moments(gxx)
    return np.concatenate([gxx[iu], quad[iu], cubic[ius]])


def add_readout_noise(
    obs: np.ndarray, sigma2: float, rng: np.random.Generator
) -> np.ndarray:
    """Add i.i.d. N(0, sigma2) to every component (every row, every column)."""
    if sigma2 < 0:
        raise ValueError(f"noise variance must be >= 0, got {sigma2!r}")
    obs = np.asarray(obs, dtype=float)
    if sigma2 == 0:
        return obs.copy()
    return obs + np.sqrt(sigma2) * rng.standard_normal(obs.shape)


@dataclass
class EchoStateReport:
    spectral_radius: float
    passed: bool


def echo_state_check(cfg: ReservoirConfig, S: np.ndarray) -> EchoStateReport:
    rho = float(np.max(np.abs(np.linalg.eigvals(np.sqrt(cfg.R) * S))))
    return EchoStateReport(rho, rho < 1.0 - ECHO_STATE_MARGIN)


def draw_crystal(
    cfg: ReservoirConfig,
    rng: np.random.Generator | None = None,
    max_attempts: int = MAX_CRYSTAL_ATTEMPTS,
) -> np.ndarray:
    """Draw a crystal satisfying the echo-state condition, resampling on failure."""
    if rng is None:
        rng = np.random.default_rng(cfg.crystal_seed)
    worst = 0.0
    for _ in range(max_attempts):
        S = compose_crystal(cfg.N, cfg.r, rng)
        report = echo_state_check(cfg, S)
        if report.passed:
            return S
        worst = max(worst, report.spectral_radius)
    raise EchoStateError(
        f"no crystal with rho(A) < 1 in {max_attempts} draws "
        f"(N={cfg.N}, R={cfg.R}, r={cfg.r}, largest rho={worst:.4f})"
    )


@dataclass
class ReservoirRuntime:
    """A crystal plus a live loop state; advanced in place by ``drive``."""

    cfg: ReservoirConfig
    S: np.ndarray
    state: LoopState = field(default=None)

    def __post_init__(self):
        if self.state is None:
            self.state = LoopState.vacuum(self.cfg.N)

    def drive(self, inputs, sigma2: float = 0.0, rng=None, backend=None) -> np.ndarray:
        """Feed inputs, return measured observables (one row per input)."""
        inputs = np.asarray(inputs, dtype=float)
        if not np.all(np.isfinite(inputs)):
            raise ValueError("inputs must be finite")
        phases = self.cfg.m * np.pi * inputs
        gxx, G = _core.loop_recursion(
            self.S, self.cfg.R, self.state.covariance, phases, self.cfg.r_input, backend
        )
        self.state = LoopState(G, self.state.step_index + len(inputs))
        obs = observables_from_xx(gxx)
        if sigma2:
            obs = add_readout_noise(obs, sigma2, rng)
        return obs


def run_sequence(
    inputs,
    cfg: ReservoirConfig,
    S: np.ndarray,
    sigma2: float = 0.0,
    rng: np.random.Generator | None = None,
    *,
    backend: str | None = None,
    return_runtime: bool = False,
):
    """Drive a vacuum-initialised loop with ``inputs``; rows are measured observables."""
    report = echo_state_check(cfg, S)
    if not report.passed:
        raise EchoStateError(f"rho(A) = {report.spectral_radius:.6f} >= 1")
    if sigma2 and rng is None:
        raise ValueError("rng is required when sigma2 > 0")
    runtime = ReservoirRuntime(cfg, np.asarray(S, dtype=float))
    obs = runtime.drive(inputs, sigma2, rng, backend)
    return (obs, runtime) if return_runtime else obs


def input_covariances(inputs, cfg: ReservoirConfig) -> list[np.ndarray]:
    return [
        squeezed_vacuum_covariance(cfg.r_input, encode_input(s, cfg.m), cfg.N)
        for s in inputs
    ]
