"""Kernel selection: the compiled extension if it imports, else the numpy fallback.

Set ``LOOPQRC_PURE_PYTHON=1`` to force the fallback. Every entry point also
takes ``backend="python" | "cython"`` to pick one explicitly.
"""

import os

import numpy as np

from . import _fallback

try:
    if os.environ.get("LOOPQRC_PURE_PYTHON", "").lower() in ("1", "true", "yes"):
        raise ImportError("pure python requested")
    from . import _kernels
except ImportError:
    _kernels = None

BACKEND = "cython" if _kernels is not None else "python"


def _pick(name, backend):
    if backend is None:
        backend = BACKEND
    if backend == "python":
        return getattr(_fallback, name)
    if backend == "cython":
        if _kernels is None:
            raise RuntimeError("compiled kernels are not available")
        return getattr(_kernels, name)
    raise ValueError(f"unknown backend {backend!r}")


def loop_recursion(S, R, gamma0, phases, r_input, backend=None):
    fn = _pick("loop_recursion", backend)
    return fn(
        np.ascontiguousarray(S, dtype=np.float64),
        float(R),
        np.ascontiguousarray(gamma0, dtype=np.float64),
        np.ascontiguousarray(phases, dtype=np.float64),
        float(r_input),
    )


def mackey_glass_grid(history, n_steps, lag, h, beta, gamma, power, hermite=True, backend=None):
    fn = _pick("mackey_glass_grid", backend)
    return fn(float(history), int(n_steps), int(lag), float(h), float(beta),
              float(gamma), float(power), bool(hermite))
