"""Gaussian-state primitives in the interleaved quadrature ordering.

All matrices use the layout ``(x_1, p_1, ..., x_N, p_N)`` and the vacuum
covariance is ``I / 2``.
"""

from __future__ import annotations

import numpy as np

VACUUM_VARIANCE = 0.5


class PhysicalityError(ValueError):
    """Raised when a covariance matrix violates the uncertainty principle."""


def _check_modes(N: int) -> None:
    if int(N) != N or N < 1:
        raise ValueError(f"mode count must be a positive integer, got {N!r}")


def symplectic_form(N: int) -> np.ndarray:
    """Return the 2N x 2N symplectic form, a direct sum of [[0, 1], [-1, 0]]."""
    _check_modes(N)
    return np.kron(np.eye(N), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def vacuum_covariance(N: int) -> np.ndarray:
    _check_modes(N)
    return VACUUM_VARIANCE * np.eye(2 * N)


def xxpp_to_interleaved(N: int) -> np.ndarray:
    """Permutation P with ``P @ (x..., p...) == (x_1, p_1, ...)``."""
    perm = np.empty(2 * N, dtype=int)
    perm[0::2] = np.arange(N)
    perm[1::2] = np.arange(N, 2 * N)
    return np.eye(2 * N)[perm]


def haar_unitary(N: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed N x N unitary from a complex Ginibre matrix.

    The QR factor is gauge-fixed by the phases of the triangular diagonal so
    the result is exactly Haar rather than QR-implementation dependent.
    """
    _check_modes(N)
    z = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d)).conj()


def unitary_to_symplectic(u: np.ndarray) -> np.ndarray:
    """Real orthogonal-symplectic representation of a unitary, interleaved."""
    N = u.shape[0]
    X, Y = u.real, u.imag
    block = np.block([[X, -Y], [Y, X]])
    P = xxpp_to_interleaved(N)
    return P @ block @ P.T


def random_orthogonal_symplectic(N: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_to_symplectic(haar_unitary(N, rng))


def squeeze_block(N: int, r: float) -> np.ndarray:
    """Diagonal Bloch-Messiah core: diag(e^{r/2}, e^{-r/2}) on every mode."""
    _check_modes(N)
    return np.diag(np.tile([np.exp(r / 2), np.exp(-r / 2)], N))


def compose_crystal(
    N: int,
    r: float,
    rng: np.random.Generator | None = None,
    *,
    identity_passive: bool = False,
) -> np.ndarray:
    """Random symplectic crystal ``S = U @ Delta @ V`` with uniform squeezing r.

    U and V are independent Haar orthogonal-symplectic draws. With
    ``identity_passive=True`` both are the identity (deterministic test hook)
    and ``rng`` may be omitted.
    """
    if not np.isfinite(r) or r < 0:
        raise ValueError(f"squeeze strength must be >= 0, got {r!r}")
    delta = squeeze_block(N, r)
    if identity_passive:
        return delta
    if rng is None:
        raise ValueError("rng is required unless identity_passive=True")
    U = random_orthogonal_symplectic(N, rng)
    V = random_orthogonal_symplectic(N, rng)
    return U @ delta @ V


def singular_spectrum(S: np.ndarray) -> np.ndarray:
    """Singular values in descending order."""
    S = np.asarray(S, dtype=float)
    if not np.all(np.isfinite(S)):
        raise ValueError("matrix has non-finite entries")
    return np.linalg.svd(S, compute_uv=False)


def symplectic_residual(S: np.ndarray) -> float:
    """Frobenius norm of ``S Omega S^T - Omega``."""
    Om = symplectic_form(S.shape[0] // 2)
    return float(np.linalg.norm(S @ Om @ S.T - Om))


def rotation(phi: float) -> np.ndarray:
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, -s], [s, c]])


def single_mode_squeezed(r_input: float, phi: float) -> np.ndarray:
    """2x2 covariance of a squeezed vacuum; x is squeezed at ``phi = 0``.

    Depends on ``phi`` only through ``2 phi``, so it is pi-periodic.
    """
    if r_input < 0:
        raise ValueError(f"input squeezing must be >= 0, got {r_input!r}")
    c2, s2 = np.cos(2.0 * phi), np.sin(2.0 * phi)
    ch, sh = np.cosh(r_input), np.sinh(r_input)
    return 0.5 * np.array([[ch - sh * c2, -sh * s2], [-sh * s2, ch + sh * c2]])


def squeezed_vacuum_covariance(r_input: float, phi: float, N: int) -> np.ndarray:
    """N uncorrelated copies of the same single-mode squeezed vacuum."""
    _check_modes(N)
    return np.kron(np.eye(N), single_mode_squeezed(r_input, phi))


def symplectic_eigenvalues(cov: np.ndarray) -> np.ndarray:
    """Moduli of the eigenvalues of ``i Omega cov``, one per mode, ascending."""
    N = cov.shape[0] // 2
    ev = np.abs(np.linalg.eigvals(1j * symplectic_form(N) @ cov))
    return np.sort(ev)[::2]


def is_physical(cov: np.ndarray, tol: float = 1e-9) -> bool:
    """Check symmetry and ``cov + (i/2) Omega >= 0`` up to ``tol``."""
    cov = np.asarray(cov, dtype=float)
    n = cov.shape[0]
    if cov.ndim != 2 or n != cov.shape[1] or n % 2:
        return False
    if not np.all(np.isfinite(cov)):
        return False
    if np.max(np.abs(cov - cov.T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(cov))):
        return False
    H = cov + 0.5j * symplectic_form(n // 2)
    return bool(np.linalg.eigvalsh(H)[0] >= -tol)


def check_physical(cov: np.ndarray, tol: float = 1e-9) -> None:
    if not is_physical(cov, tol):
        raise PhysicalityError("covariance matrix is not a physical Gaussian state")


def wick_fourth_moments(gxx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Fourth moments of a zero-mean Gaussian from its x-x covariance block.

    Returns ``(<x_i^2 x_j^2>, <x_i^3 x_j>)`` as N x N tables, via Isserlis:
    ``<x_i^2 x_j^2> = g_ii g_jj + 2 g_ij^2`` and ``<x_i^3 x_j> = 3 g_ii g_ij``.
    """
    g = np.asarray(gxx, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ValueError("x-x block must be square")
    if not np.allclose(g, g.T, rtol=0, atol=1e-12):
        raise ValueError("x-x block must be symmetric")
    d = np.diag(g)
    return np.outer(d, d) + 2.0 * g**2, 3.0 * d[:, None] * g
