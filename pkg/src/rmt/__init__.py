"""
Random-matrix samplers and edge scalings.

Conventions: GUE has density ∝ exp(-tr H²) (diagonal variance 1/2,
off-diagonal real/imaginary parts variance 1/4); GOE has density
∝ exp(-tr M²/2) (diagonal variance 1, off-diagonal variance 1/2).
"""
import logging

import numpy as np
from scipy import linalg

from src.exceptions import DomainException, NumericException
from src.kernels import SourceSpec, TimeGrid, gaussian_regime_width

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12


def sample_gue(n, rng):
    """
    Parameters:
    - n: matrix size.
    - rng: numpy Generator.

    Returns:
    Complex Hermitian n x n matrix with density ∝ exp(-tr H²).
    """
    if n < 1:
        raise DomainException(f"n 必须 >= 1：{n}")
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (a + a.conj().T) / (2.0 * np.sqrt(2.0))


def sample_goe(n, rng):
    if n < 1:
        raise DomainException(f"n 必须 >= 1：{n}")
    a = rng.standard_normal((n, n))
    return (a + a.T) / 2.0


def sample_source_matrix(n, src: SourceSpec, rng):
    """H + V with H ~ exp(-tr H²) and V = diag(epsilons)."""
    if src.n != n:
        raise DomainException(f"SourceSpec 维数 {src.n} 与 n={n} 不一致")
    h = sample_gue(n, rng)
    h[np.diag_indices(n)] += src.array
    return h


def _check_hermitian(m):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainException(f"矩阵必须是方阵：{m.shape}")
    if not np.all(np.isfinite(m)):
        raise NumericException("矩阵中存在非有限值")
    scale = max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL * scale:
        raise DomainException("矩阵不是 Hermitian 的")
    return m


def eigs_hermitian(m):
    """All eigenvalues, ascending (LAPACK heev: Householder + implicit QL/QR)."""
    m = _check_hermitian(m)
    try:
        return linalg.eigvalsh(m, driver="ev", check_finite=False)
    except linalg.LinAlgError as e:
        raise NumericException(f"特征值求解不收敛：{e}")


def largest_eigenvalue(m):
    m = _check_hermitian(m)
    n = m.shape[0]
    try:
        return float(
            linalg.eigvalsh(m, subset_by_index=[n - 1, n - 1], check_finite=False)[0]
        )
    except linalg.LinAlgError as e:
        raise NumericException(f"特征值求解不收敛：{e}")


def edge_scale(lambda1, n):
    return (np.asarray(lambda1) - np.sqrt(2.0 * n)) * np.sqrt(2.0) * n ** (1.0 / 6.0)


def edge_unscale(x, n):
    return np.sqrt(2.0 * n) + np.asarray(x) / (np.sqrt(2.0) * n ** (1.0 / 6.0))


def gaussian_regime_center(lam):
    return (lam + 1.0 / lam) / np.sqrt(2.0)


def edge_scale_gaussian(lambda1, n, lam):
    b_g = gaussian_regime_width(lam)
    return (np.asarray(lambda1) - gaussian_regime_center(lam) * np.sqrt(n)) / b_g


def sample_goe2_edge(n, rng):
    """Larger of two independent edge-scaled GOE top eigenvalues."""
    first = edge_scale(largest_eigenvalue(sample_goe(n, rng)), n)
    second = edge_scale(largest_eigenvalue(sample_goe(n, rng)), n)
    return float(max(first, second))


def sample_chain_start(n, src: SourceSpec, rng):
    """H₁ = V/2 + GUE, distributed as exp(-tr H² + tr V H)."""
    if src.n != n:
        raise DomainException(f"SourceSpec 维数 {src.n} 与 n={n} 不一致")
    h = sample_gue(n, rng)
    h[np.diag_indices(n)] += 0.5 * src.array
    return h


def sample_dyson_chain(n, src: SourceSpec, grid: TimeGrid, rng):
    """
    Matrix OU chain started from exp(-tr H² + tr V H), i.e. H₁ = V/2 + GUE,
    then H_{j+1} = e^{-Δ} H_j + sqrt(1 - e^{-2Δ}) G_j.

    Returns:
    (M, N) array of ascending spectra, one row per time.
    """
    if not isinstance(grid, TimeGrid):
        grid = TimeGrid(tuple(grid))
    h = sample_chain_start(n, src, rng)
    spectra = [eigs_hermitian(h)]
    for delta in grid.increments():
        decay = np.exp(-delta)
        h = decay * h + np.sqrt(-np.expm1(-2.0 * delta)) * sample_gue(n, rng)
        spectra.append(eigs_hermitian(h))
    return np.array(spectra)


__all__ = [
    "TimeGrid",
    "edge_scale",
    "edge_scale_gaussian",
    "edge_unscale",
    "eigs_hermitian",
    "gaussian_regime_center",
    "largest_eigenvalue",
    "sample_chain_start",
    "sample_dyson_chain",
    "sample_goe",
    "sample_goe2_edge",
    "sample_gue",
    "sample_source_matrix",
]
