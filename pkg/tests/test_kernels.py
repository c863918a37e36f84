import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from loopqrc import _core
from loopqrc.gaussian import compose_crystal, squeezed_vacuum_covariance, vacuum_covariance

needs_ext = pytest.mark.skipif(_core._kernels is None, reason="compiled extension not built")


@needs_ext
@given(
    st.integers(min_value=1, max_value=6),
    st.floats(0.0, 1.0),
    st.floats(0.0, 1.5),
    st.floats(0.0, 2.5),
    st.integers(min_value=0, max_value=2**32 - 1),
)
def test_loop_recursion_backends_agree(N, R, r, r_input, seed):
    rng = np.random.default_rng(seed)
    S = compose_crystal(N, r, rng) * np.sqrt(min(1.0, 0.9 / max(R, 1e-3)))
    g0 = squeezed_vacuum_covariance(0.5, 0.2, N)
    phases = rng.uniform(-np.pi, np.pi, 30)
    xa, Ga = _core.loop_recursion(S, R, g0, phases, r_input, backend="python")
    xb, Gb = _core.loop_recursion(S, R, g0, phases, r_input, backend="cython")
    scale = max(1.0, np.abs(Ga).max())
    assert np.allclose(xa, xb, rtol=1e-12, atol=1e-13 * scale)
    assert np.allclose(Ga, Gb, rtol=1e-12, atol=1e-13 * scale)
    assert np.array_equal(Gb, Gb.T)


@needs_ext
def test_empty_phase_sequence():
    g0 = vacuum_covariance(2)
    x, G = _core.loop_recursion(np.eye(4), 0.5, g0, np.empty(0), 2.0, backend="cython")
    assert x.shape == (0, 2, 2) and np.array_equal(G, g0)


def test_unknown_backend():
    with pytest.raises(ValueError):
        _core.loop_recursion(np.eye(2), 0.5, np.eye(2) / 2, [0.0], 1.0, backend="fortran")


def test_pure_python_switch():
    env = dict(os.environ, LOOPQRC_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import loopqrc; print(loopqrc.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


def test_backend_reported():
    assert _core.BACKEND in ("cython", "python")
