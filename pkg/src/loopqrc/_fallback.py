"""Pure numpy implementation of the loop recursion kernel."""

import numpy as np

from .gaussian import single_mode_squeezed


def loop_recursion(S, R, gamma0, phases, r_input):
    """Iterate the loop for a sequence of input squeezing phases.

    Returns the x-x blocks of every out-coupled pulse, shape (L, N, N), and
    the final loop covariance.
    """
    S = np.ascontiguousarray(S, dtype=np.float64)
    G = np.array(gamma0, dtype=np.float64, copy=True)
    n2 = S.shape[0]
    N = n2 // 2
    keep = 1.0 - R
    out = np.empty((len(phases), N, N))
    diag = np.arange(N)
    xs = 2 * diag
    for k, phi in enumerate(phases):
        blk = single_mode_squeezed(r_input, phi)
        out[k] = keep * G[0::2, 0::2]
        out[k, diag, diag] += R * blk[0, 0]

        M = R * G
        M[xs, xs] += keep * blk[0, 0]
        M[xs, xs + 1] += keep * blk[0, 1]
        M[xs + 1, xs] += keep * blk[1, 0]
        M[xs + 1, xs + 1] += keep * blk[1, 1]
        G = S @ M @ S.T
        G = np.tril(G) + np.tril(G, -1).T
    return out, G


def _mg_rhs(x, xd, beta, gamma, power):
    return -gamma * x + beta * xd / (1.0 + xd**power)


def mackey_glass_grid(history, n_steps, lag, h, beta, gamma, power, hermite):
    """RK4 for the Mackey-Glass delay equation on a uniform grid.

    The delayed value at the half-step stages comes from the neighbouring grid
    points, by cubic Hermite (using stored derivatives) or linear interpolation.
    The history is constant, so its derivative is zero up to t = 0.
    """
    x = [float(history)] * (lag + 1)
    f = [0.0] * (lag + n_steps + 1)
    for n in range(lag, lag + n_steps):
        xn = x[n]
        j0 = n - lag
        d0 = x[j0]
        d1 = x[j0 + 1]
        dm = 0.5 * (d0 + d1)
        if hermite:
            fb = 0.0 if j0 + 1 == lag else f[j0 + 1]
            dm = dm + h / 8.0 * (f[j0] - fb)
        k1 = _mg_rhs(xn, d0, beta, gamma, power)
        f[n] = k1
        k2 = _mg_rhs(xn + 0.5 * h * k1, dm, beta, gamma, power)
        k3 = _mg_rhs(xn + 0.5 * h * k2, dm, beta, gamma, power)
        k4 = _mg_rhs(xn + h * k3, d1, beta, gamma, power)
        x.append(xn + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
    return np.array(x[lag:])
