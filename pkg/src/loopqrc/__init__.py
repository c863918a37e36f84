"""Simulator of a loop-based photonic quantum reservoir computer on Gaussian states."""

__version__ = "0.1.0"

from ._core import BACKEND
from .gaussian import (
    compose_crystal,
    random_orthogonal_symplectic,
    singular_spectrum,
    squeezed_vacuum_covariance,
    symplectic_form,
    wick_fourth_moments,
)
from .reservoir import (
    LoopState,
    ReservoirConfig,
    add_readout_noise,
    draw_crystal,
    echo_state_check,
    encode_input,
    expanded_covariance_oracle,
    extract_observables,
    loop_step,
    run_sequence,
)
from .readout import build_design_matrix, capacity, fit_readout, normalized_mse, predict
from .analysis import delay_cut, run_ensemble, spectral_norm_decay
