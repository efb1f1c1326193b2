"""Adiabatic following of the precessing field, closed and open.

The drive is written as ``beta = beta0 cos(phi)``, ``alpha = beta0 sin(phi)``
with rotation frequency ``w = 2 beta0 x``.  Fidelity is the overlap of the
evolved state with the instantaneous ``+beta0`` eigenprojector.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bath import ModelParams, hamming_spectrum
from .dynamics import evolve
from .errors import ContractError, PreconditionError
from .qubit import fidelity, frobenius_norm_sq, herm2_exp

HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class AdiabaticConfig:
    """Field magnitude ``beta0``, polar angle ``phi``, adiabatic parameter ``x``
    and the bath (its own drive fields are ignored and rebuilt from these)."""

    beta0: float
    phi: float
    x: float
    bath: ModelParams

    def __post_init__(self):
        if not self.beta0 > 0:
            raise PreconditionError("beta0 must be positive")

    @property
    def alpha(self) -> float:
        return self.beta0 * math.sin(self.phi)

    @property
    def beta(self) -> float:
        return self.beta0 * math.cos(self.phi)

    @property
    def omega_drive(self) -> float:
        return 2.0 * self.beta0 * self.x

    @property
    def params(self) -> ModelParams:
        return self.bath.replace(alpha=self.alpha, beta=self.beta,
                                 omega_drive=self.omega_drive)

    @property
    def coupling(self) -> float:
        """The uniform coupling ``g``; requires a uniform bath."""
        if not self.bath.uniform:
            raise ContractError("closed-form open fidelity needs a uniform bath")
        return self.bath.g_n[0]


def eigenstate_plus(phi: float, omega_t: float) -> np.ndarray:
    """Projector on ``(cos(phi/2), exp(i w t) sin(phi/2))``, the ``+beta0`` eigenvector."""
    psi = np.array([math.cos(0.5 * phi), np.exp(1j * omega_t) * math.sin(0.5 * phi)])
    return np.outer(psi, psi.conj())


def _deviation(xk, beta0: float, t):
    """``x^2/(1+x^2) sin^2(beta0 sqrt(1+x^2) t)``: one term of the infidelity."""
    xk = np.asarray(xk, dtype=float)
    t = np.asarray(t, dtype=float)
    omega = beta0 * np.sqrt(1.0 + xk * xk)
    return (xk * xk / (1.0 + xk * xk)) * np.sin(np.multiply.outer(t, omega)) ** 2


def _require_half_pi(cfg: AdiabaticConfig) -> None:
    if abs(cfg.phi - HALF_PI) > 1e-12:
        raise ContractError("closed-form fidelity holds only at phi = pi/2; "
                            "use fidelity_via_channel")


def closed_fidelity(t, cfg: AdiabaticConfig):
    """Fidelity of the uncoupled qubit, ``1 - x^2/(1+x^2) sin^2(beta0 sqrt(1+x^2) t)``."""
    _require_half_pi(cfg)
    out = 1.0 - _deviation(cfg.x, cfg.beta0, t)
    return out[()] if np.ndim(out) == 0 else out


def class_detunings(cfg: AdiabaticConfig) -> np.ndarray:
    """``x_k = g (N - 2k)/beta0 - x`` for every Hamming class ``k``."""
    n = cfg.bath.n
    k = np.arange(n + 1, dtype=float)
    return cfg.coupling * (n - 2 * k) / cfg.beta0 - cfg.x


def infidelity(t, cfg: AdiabaticConfig):
    """``R(t) = sum_k w_k x_k^2/(1+x_k^2) sin^2(Omega(x_k) t)`` with Hamming-class weights."""
    _require_half_pi(cfg)
    spec = hamming_spectrum(cfg.params)
    dev = _deviation(class_detunings(cfg), cfg.beta0, t)
    out = dev @ spec.weight
    return out[()] if np.ndim(out) == 0 else out


def open_fidelity(t, cfg: AdiabaticConfig):
    """Fidelity ``F = 1 - R(t)`` of the qubit coupled to a uniform bath (phi = pi/2)."""
    out = 1.0 - np.asarray(infidelity(t, cfg))
    out = np.clip(out, 0.0, 1.0)
    return out[()] if out.ndim == 0 else out


def fidelity_via_channel(t, cfg: AdiabaticConfig, mode: str | None = None):
    """Fidelity computed from the reduced-dynamics channel, valid for any ``phi`` and bath.

    ``t`` may be a scalar or a strictly increasing grid.
    """
    times = np.atleast_1d(np.asarray(t, dtype=float))
    rho0 = eigenstate_plus(cfg.phi, 0.0)
    traj = evolve(cfg.params, rho0, times, mode=mode)
    w = cfg.omega_drive
    refs = np.stack([eigenstate_plus(cfg.phi, w * s) for s in times])
    out = fidelity(traj.states, refs)
    return out[0] if np.ndim(t) == 0 else out


def mode_fidelity_frobenius(xk: float, beta0: float, t: float) -> float:
    """``||P U_k(t) P||_F^2`` with ``P`` the initial projector at phi = pi/2.

    ``U_k`` is generated by ``beta0 (x_k sz + sx)``; the sandwich by ``P``
    is what makes the Frobenius norm equal the overlap ``Tr(U P U^dag P)``.
    """
    h = beta0 * np.array([[xk, 1.0], [1.0, -xk]], dtype=complex)
    u = herm2_exp(h, t)
    p = eigenstate_plus(HALF_PI, 0.0)
    return frobenius_norm_sq(p @ u @ p)


def weak_coupling_bound(cfg: AdiabaticConfig) -> float:
    """Upper bound ``(N g/beta0 + x)^2`` on ``1 - F(t)``, valid for all ``t``."""
    return (cfg.bath.n * abs(cfg.coupling) / cfg.beta0 + abs(cfg.x)) ** 2
