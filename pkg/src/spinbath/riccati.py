"""Closed-form solution of the commuting-block Riccati equation.

For the block Hamiltonian ``[[H+, a I], [a I, H-]]`` with commuting diagonal
blocks the Riccati equation reduces mode by mode to the scalar quadratic
``a f**2 + 2 lam f - a = 0``, where ``lam`` runs over the eigenvalues ``E_i``
of ``(H+ - H-)/2``.  Its two roots are ``f`` (principal) and ``f2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BranchError


def _check_alpha(alpha) -> None:
    if np.any(np.asarray(alpha) == 0):
        raise BranchError(
            "Riccati branches are singular at alpha == 0; the block "
            "Hamiltonian is already diagonal there (X = 0)")


def riccati_f(lam, alpha, dtype=float):
    """Principal root ``(sqrt(lam**2 + alpha**2) - lam) / alpha``.

    For ``lam > 0`` the rationalised form ``alpha / (sqrt(...) + lam)`` is
    used, which keeps full relative precision when ``lam >> |alpha|``.
    ``dtype=np.longdouble`` evaluates and returns the root in extended
    precision, which shrinks the residual of large roots (``|f| >> 1``).
    """
    _check_alpha(alpha)
    lam = np.asarray(lam, dtype=dtype)
    alpha = np.asarray(alpha, dtype=dtype)
    root = np.hypot(lam, alpha)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(lam > 0, alpha / (root + lam), (root - lam) / alpha)
    return out[()] if out.ndim == 0 else out


def riccati_f2(lam, alpha, dtype=float):
    """Secondary root ``(-sqrt(lam**2 + alpha**2) - lam) / alpha``; equals ``-1/f``."""
    _check_alpha(alpha)
    lam = np.asarray(lam, dtype=dtype)
    alpha = np.asarray(alpha, dtype=dtype)
    root = np.hypot(lam, alpha)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(lam < 0, -alpha / (root - lam), -(root + lam) / alpha)
    return out[()] if out.ndim == 0 else out


def riccati_residual(f, lam, alpha):
    """``|alpha f**2 + 2 lam f - alpha|``, evaluated in extended precision."""
    f = np.asarray(f, dtype=np.longdouble)
    lam = np.asarray(lam, dtype=np.longdouble)
    alpha = np.asarray(alpha, dtype=np.longdouble)
    res = np.abs(alpha * f * f + 2 * lam * f - alpha).astype(float)
    return res[()] if res.ndim == 0 else res


@dataclass(frozen=True)
class ModeSimilarity:
    """Unitary similarity transform built from one Riccati eigenvalue.

    ``U`` is the raw matrix ``[[1, -f], [f, 1]]`` divided by
    ``sqrt(det_raw)`` with ``det_raw = 1 + f**2``.
    """

    f: float
    U: np.ndarray
    det_raw: float


def mode_similarity(f: float) -> ModeSimilarity:
    f = float(f)
    if not np.isfinite(f):
        raise ValueError("Riccati eigenvalue must be finite")
    det_raw = 1.0 + f * f
    scale = 1.0 / np.sqrt(det_raw)
    u = scale * np.array([[1.0, -f], [f, 1.0]], dtype=complex)
    return ModeSimilarity(f=f, U=u, det_raw=det_raw)


def similarity_stack(f) -> np.ndarray:
    """Vectorised ``mode_similarity(f).U`` for an array of eigenvalues."""
    f = np.asarray(f, dtype=float)
    scale = 1.0 / np.sqrt(1.0 + f * f)
    u = np.empty(f.shape + (2, 2), dtype=complex)
    u[..., 0, 0] = scale
    u[..., 1, 1] = scale
    u[..., 0, 1] = -f * scale
    u[..., 1, 0] = f * scale
    return u
