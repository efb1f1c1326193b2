"""Closed-form 2x2 linear algebra for a single qubit.

All matrices are plain ``numpy`` complex arrays.  Functions that act on a
single 2x2 matrix also accept stacks of shape ``(..., 2, 2)``.
"""
from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionError, PreconditionError

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)

HERMITIAN_ATOL = 1e-12


class Herm2(NamedTuple):
    """Pauli decomposition ``H = c0 * I + n . sigma`` of a Hermitian 2x2 matrix."""

    c0: np.ndarray
    n: np.ndarray  # shape (..., 3)

    def matrix(self) -> np.ndarray:
        c0 = np.asarray(self.c0, dtype=float)[..., None, None]
        n = np.asarray(self.n, dtype=float)
        return (c0 * I2 + n[..., 0, None, None] * SIGMA_X
                + n[..., 1, None, None] * SIGMA_Y + n[..., 2, None, None] * SIGMA_Z)


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def _check_2x2(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.shape[-2:] != (2, 2):
        raise DimensionError(f"expected (..., 2, 2) array, got shape {m.shape}")
    return m


def herm2_decompose(h: np.ndarray, atol: float = HERMITIAN_ATOL) -> Herm2:
    h = _check_2x2(h)
    scale = max(1.0, float(np.max(np.abs(h), initial=0.0)))
    if np.max(np.abs(h - dagger(h)), initial=0.0) > atol * scale:
        raise PreconditionError("matrix is not Hermitian")
    c0 = 0.5 * (h[..., 0, 0].real + h[..., 1, 1].real)
    nz = 0.5 * (h[..., 0, 0].real - h[..., 1, 1].real)
    off = 0.5 * (h[..., 0, 1] + np.conj(h[..., 1, 0]))
    n = np.stack([off.real, -off.imag, nz], axis=-1)
    return Herm2(c0, n)


def herm2_exp(h: np.ndarray, t=1.0) -> np.ndarray:
    """Return ``exp(-i h t)`` for Hermitian ``h`` using the Pauli closed form.

    ``t`` broadcasts against the leading (stack) dimensions of ``h``.
    """
    c0, n = herm2_decompose(h)
    t = np.asarray(t, dtype=float)
    r = np.sqrt(np.sum(n * n, axis=-1))
    rt = r * t
    cos = np.cos(rt)
    # sin(r t) / r, with the removable singularity at r == 0 set to t
    safe_r = np.where(r > 0, r, 1.0)
    sinc = np.where(r > 0, np.sin(rt) / safe_r, t)
    phase = np.exp(-1j * c0 * t)
    nx, ny, nz = n[..., 0], n[..., 1], n[..., 2]
    u = np.empty(np.broadcast(cos, nx).shape + (2, 2), dtype=complex)
    u[..., 0, 0] = cos - 1j * sinc * nz
    u[..., 1, 1] = cos + 1j * sinc * nz
    u[..., 0, 1] = -1j * sinc * (nx - 1j * ny)
    u[..., 1, 0] = -1j * sinc * (nx + 1j * ny)
    return phase[..., None, None] * u


def frobenius_norm_sq(m: np.ndarray) -> float:
    """``Tr(M M^dagger)``: the sum of squared moduli of the entries."""
    m = np.asarray(m, dtype=complex)
    return float(np.sum(m.real ** 2 + m.imag ** 2))


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Overlap ``Tr(rho sigma)``, clipped to ``[0, 1]``.

    This equals the Uhlmann fidelity whenever one argument is pure, which is
    the only way it is used for adiabatic-following comparisons.
    """
    rho = _check_2x2(rho)
    sigma = _check_2x2(sigma)
    value = np.einsum("...ij,...ji->...", rho, sigma).real
    return np.clip(value, 0.0, 1.0)


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Half the trace norm of ``rho - sigma`` (Hermitian 2x2 arguments)."""
    d = _check_2x2(rho) - _check_2x2(sigma)
    # eigenvalues of a Hermitian 2x2: c0 +- |n|
    c0 = 0.5 * (d[..., 0, 0].real + d[..., 1, 1].real)
    nz = 0.5 * (d[..., 0, 0].real - d[..., 1, 1].real)
    off = 0.5 * (d[..., 0, 1] + np.conj(d[..., 1, 0]))
    r = np.sqrt(nz ** 2 + np.abs(off) ** 2)
    return 0.5 * (np.abs(c0 + r) + np.abs(c0 - r))


def purity(rho: np.ndarray) -> float:
    rho = _check_2x2(rho)
    return np.einsum("...ij,...ji->...", rho, rho).real


def bloch_state(bx: float, by: float, bz: float) -> np.ndarray:
    """Density matrix ``(I + b . sigma) / 2`` for a Bloch vector with ``|b| <= 1``."""
    if bx * bx + by * by + bz * bz > 1.0 + 1e-12:
        raise PreconditionError("Bloch vector must have norm <= 1")
    return 0.5 * (I2 + bx * SIGMA_X + by * SIGMA_Y + bz * SIGMA_Z)


def density_violations(rho: np.ndarray) -> dict[str, float]:
    """Worst-case deviations from Hermiticity, unit trace and positivity."""
    rho = _check_2x2(rho)
    herm = np.sqrt(np.sum(np.abs(rho - dagger(rho)) ** 2, axis=(-2, -1)))
    tr = np.abs(np.trace(rho, axis1=-2, axis2=-1) - 1.0)
    hpart = 0.5 * (rho + dagger(rho))
    min_eig = np.linalg.eigvalsh(hpart)[..., 0]
    return {
        "hermiticity": float(np.max(herm)),
        "trace": float(np.max(tr)),
        "min_eigenvalue": float(np.min(min_eig)),
    }


def as_density_matrix(rho, atol: float = 1e-12) -> np.ndarray:
    """Validate and return ``rho`` as a 2x2 complex density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise DimensionError(
            f"qubit state must be 2x2, got {rho.shape}; joint system-bath "
            "(correlated) initial states are not supported")
    v = density_violations(rho)
    if v["hermiticity"] > atol:
        raise PreconditionError("density matrix is not Hermitian")
    if v["trace"] > atol:
        raise PreconditionError("density matrix does not have unit trace")
    if v["min_eigenvalue"] < -atol:
        raise PreconditionError("density matrix is not positive semidefinite")
    return rho


def pure_state(psi: Sequence[complex]) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def split_blocks(m: np.ndarray) -> np.ndarray:
    """View a ``(2D, 2D)`` matrix as a ``(2, 2, D, D)`` array of blocks."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
        raise DimensionError(f"cannot split shape {m.shape} into 2x2 blocks")
    d = m.shape[0] // 2
    return m.reshape(2, d, 2, d).transpose(0, 2, 1, 3)


def partial_trace_blocks(blocks) -> np.ndarray:
    """Trace out the environment of a 2x2 block operator matrix.

    ``blocks`` is either a ``(2, 2, D, D)`` array or a nested 2x2 sequence of
    ``D x D`` matrices; entry ``(i, j)`` of the result is ``Tr blocks[i][j]``.
    """
    if isinstance(blocks, np.ndarray) and blocks.ndim == 4:
        if blocks.shape[:2] != (2, 2) or blocks.shape[2] != blocks.shape[3]:
            raise DimensionError(f"bad block array shape {blocks.shape}")
        return np.trace(blocks, axis1=2, axis2=3).astype(complex)
    rows = list(blocks)
    if len(rows) != 2 or any(len(r) != 2 for r in rows):
        raise DimensionError("expected a 2x2 arrangement of blocks")
    mats = [[np.atleast_2d(np.asarray(b, dtype=complex)) for b in r] for r in rows]
    shapes = {b.shape for r in mats for b in r}
    if len(shapes) != 1:
        raise DimensionError(f"blocks have mismatched shapes {sorted(shapes)}")
    (shape,) = shapes
    if shape[0] != shape[1] or shape[0] < 1:
        raise DimensionError(f"blocks must be square, got {shape}")
    return np.array([[np.trace(b) for b in r] for r in mats], dtype=complex)
