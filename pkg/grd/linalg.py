import logging
from dataclasses import dataclass

import numpy as np


logger = logging.getLogger(__name__)

EIGH_MAX_COLUMNS = 512
POWER_TOL = 1e-10
POWER_MAX_ITER = 100_000
POWER_SEED = 0


@dataclass(frozen=True)
class SpectralNorm:
    value: float
    method: str
    iterations: int = 0


def spectral_norm(
    matrix: np.ndarray,
    eigh_max_columns: int = EIGH_MAX_COLUMNS,
    tol: float = POWER_TOL,
    max_iter: int = POWER_MAX_ITER,
) -> SpectralNorm:
    """Operator 2-norm of a complex matrix.

    Uses a Hermitian eigensolve of ``M^H M`` up to ``eigh_max_columns``
    columns and power iteration on ``M^H M`` beyond that.
    """
    m = np.asarray(matrix, dtype=complex)
    if m.size == 0:
        return SpectralNorm(0.0, 'empty')
    if m.shape[1] <= eigh_max_columns:
        gram = m.conj().T @ m
        top = np.linalg.eigvalsh((gram + gram.conj().T) / 2)[-1]
        return SpectralNorm(float(np.sqrt(max(top, 0.0))), 'eigh')
    return _power_iteration(m, tol, max_iter)


def _power_iteration(m: np.ndarray, tol: float, max_iter: int) -> SpectralNorm:
    rng = np.random.default_rng(POWER_SEED)
    v = rng.standard_normal(m.shape[1]) + 1j * rng.standard_normal(m.shape[1])
    v /= np.linalg.norm(v)
    estimate = 0.0
    for iteration in range(1, max_iter + 1):
        w = m.conj().T @ (m @ v)
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return SpectralNorm(0.0, 'power', iteration)
        v = w / norm_w
        # residual ||A v - lambda v|| at the Rayleigh quotient
        av = m.conj().T @ (m @ v)
        rayleigh = float(np.real(np.vdot(v, av)))
        residual = np.linalg.norm(av - rayleigh * v)
        estimate = rayleigh
        if residual <= tol * max(rayleigh, 1.0):
            return SpectralNorm(float(np.sqrt(max(estimate, 0.0))), 'power', iteration)
    logger.warning('power iteration hit the cap of %d iterations', max_iter)
    return SpectralNorm(float(np.sqrt(max(estimate, 0.0))), 'power-capped', max_iter)


def hermitian_top(matrix: np.ndarray) -> float:
    """Largest eigenvalue of a Hermitian matrix."""
    h = np.asarray(matrix, dtype=complex)
    if h.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh((h + h.conj().T) / 2)[-1])


def hermitian_min(matrix: np.ndarray) -> float:
    h = np.asarray(matrix, dtype=complex)
    if h.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh((h + h.conj().T) / 2)[0])


def psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    """Square root of a positive semidefinite matrix by eigendecomposition."""
    h = np.asarray(matrix, dtype=complex)
    values, vectors = np.linalg.eigh((h + h.conj().T) / 2)
    values = np.clip(values, 0.0, None)
    return (vectors * np.sqrt(values)) @ vectors.conj().T


def operator_norm(matrix: np.ndarray) -> float:
    """Norm of a small fiber element."""
    m = np.asarray(matrix)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def sum_zero_max_eigenvalue(matrix: np.ndarray) -> float:
    """Top eigenvalue of a Hermitian form restricted to ``{c : sum(c) = 0}``."""
    h = np.asarray(matrix, dtype=complex)
    n = h.shape[0]
    if n <= 1:
        return 0.0
    basis = np.eye(n)[:, 1:] - np.eye(n)[:, [0]]
    q, _ = np.linalg.qr(basis)
    compressed = q.conj().T @ h @ q
    return hermitian_top(compressed)


def normalized(matrix: np.ndarray) -> np.ndarray:
    """Scaled to unit max entry (unchanged when zero)."""
    m = np.asarray(matrix, dtype=complex)
    scale = np.max(np.abs(m)) if m.size else 0.0
    return m / scale if scale > 0 else m


def random_psd(rng: np.random.Generator, n: int) -> np.ndarray:
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return a @ a.conj().T
