"""Exact reduced dynamics of the driven qubit coupled to the spin bath.

The qubit state at time ``t`` is ``V_t (sum_i w_i U_i rho0 U_i^dag) V_t^dag``:
a random-unitary channel over bath modes followed by the frame rotation
``V_t = diag(exp(-i w t/2), exp(i w t/2))``.  Each mode unitary is generated by
``H_i = [[E_i - w/2, a], [a, -(E_i - w/2)]]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bath import ModelParams, ModeSpectrum, spectrum
from .errors import ContractError, PreconditionError
from .qubit import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    as_density_matrix,
    dagger,
    herm2_exp,
    purity,
)
from .riccati import similarity_stack


def frame_rotation(t: float, omega_drive: float) -> np.ndarray:
    """``V_t = exp(-i w t sigma_z / 2)``."""
    ph = 0.5 * omega_drive * t
    return np.diag([np.exp(-1j * ph), np.exp(1j * ph)])


def mode_hamiltonian(E, omega_drive: float, alpha: float) -> np.ndarray:
    """Traceless 2x2 generator ``[[E - w/2, a], [a, -(E - w/2)]]`` (stacks over ``E``)."""
    e = np.asarray(E, dtype=float) - 0.5 * omega_drive
    h = np.empty(e.shape + (2, 2), dtype=complex)
    h[..., 0, 0] = e
    h[..., 1, 1] = -e
    h[..., 0, 1] = alpha
    h[..., 1, 0] = alpha
    return h


def mode_unitary(spec: ModeSpectrum, t: float, params: ModelParams,
                 index=None) -> np.ndarray:
    """Full per-mode propagator ``U_i(t)`` including the bath phase ``exp(-i Omega_i t)``.

    ``spec`` fixes the longitudinal field (build it with ``beta_override``
    for the rotating frame).  Returns one matrix, or a stack when ``index``
    is ``None``.
    """
    sel = slice(None) if index is None else index
    E = np.asarray(spec.E[sel])
    Omega = np.asarray(spec.Omega[sel])
    core = _core_unitaries(E, t, 0.0, params.alpha)
    return np.exp(-1j * Omega * t)[..., None, None] * core


def mode_unitary_riccati(spec: ModeSpectrum, t: float, params: ModelParams,
                         index=None) -> np.ndarray:
    """``U_i(t)`` assembled literally as ``S_i diag(e+, e-) S_i^dag`` from the Riccati data.

    ``S_i`` is the normalised similarity matrix of eigenvalue ``f_i`` and
    ``e+- = exp(-i (E_i^+- +- a f_i) t)``.  Kept as an independent check on
    :func:`mode_unitary`.
    """
    sel = slice(None) if index is None else index
    f = np.asarray(spec.f[sel], dtype=float)
    a = params.alpha
    ep = np.exp(-1j * (np.asarray(spec.Eplus[sel]) + a * f) * t)
    em = np.exp(-1j * (np.asarray(spec.Eminus[sel]) - a * f) * t)
    s = similarity_stack(f)
    d = np.zeros(np.shape(f) + (2, 2), dtype=complex)
    d[..., 0, 0] = ep
    d[..., 1, 1] = em
    return s @ d @ dagger(s)


def _core_unitaries(E: np.ndarray, t: float, omega_drive: float,
                    alpha: float) -> np.ndarray:
    """``exp(-i H_i t)`` for every mode; diagonal phases when ``alpha == 0``."""
    e = np.asarray(E, dtype=float) - 0.5 * omega_drive
    if alpha == 0.0:
        u = np.zeros(e.shape + (2, 2), dtype=complex)
        u[..., 0, 0] = np.exp(-1j * e * t)
        u[..., 1, 1] = np.exp(1j * e * t)
        return u
    return herm2_exp(mode_hamiltonian(E, omega_drive, alpha), t)


@dataclass(frozen=True)
class QubitChannel:
    """Random-unitary channel followed by a fixed frame rotation.

    ``rho -> V (sum_k w_k U_k rho U_k^dag) V^dag``.
    """

    weights: np.ndarray  # (K,)
    unitaries: np.ndarray  # (K, 2, 2)
    frame_rotation: np.ndarray  # (2, 2)

    def __len__(self) -> int:
        return len(self.weights)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return apply_channel(self, rho)

    def kraus_operators(self) -> np.ndarray:
        return np.sqrt(self.weights)[:, None, None] * (self.frame_rotation @ self.unitaries)

    def completeness(self) -> tuple[np.ndarray, np.ndarray]:
        """``sum K^dag K`` and ``sum K K^dag``; both equal the identity."""
        k = self.kraus_operators()
        kd = dagger(k)
        return np.sum(kd @ k, axis=0), np.sum(k @ kd, axis=0)


def _channel_from_spectrum(spec: ModeSpectrum, t: float,
                           params: ModelParams) -> QubitChannel:
    # spec must already carry E_i(beta_eff)
    u = _core_unitaries(spec.E, t, 0.0, params.alpha)
    return QubitChannel(np.asarray(spec.weight, dtype=float), u,
                        frame_rotation(t, params.omega_drive))


def build_channel(t: float, params: ModelParams, use_hamming=None,
                  mode: str | None = None) -> QubitChannel:
    """Kraus representation of the reduced dynamics at time ``t``.

    ``use_hamming`` selects Hamming-class aggregation (``True``), full
    enumeration (``False``) or the automatic choice (``None``).
    """
    spec = rotating_frame_spectrum(params, use_hamming, mode)
    return _channel_from_spectrum(spec, t, params)


def rotating_frame_spectrum(params: ModelParams, use_hamming=None,
                            mode: str | None = None) -> ModeSpectrum:
    """Bath spectrum with the longitudinal field replaced by ``beta - w/2``."""
    return spectrum(params, beta_override=params.beta_eff,
                    mode=_resolve_mode(use_hamming, mode))


def _resolve_mode(use_hamming, mode) -> str:
    if mode is not None:
        return mode
    if use_hamming is None:
        return "auto"
    return "hamming" if use_hamming else "enumerate"


def _mix(weights: np.ndarray, u: np.ndarray, rho: np.ndarray) -> np.ndarray:
    a = (u @ rho) * weights[:, None, None]
    return np.einsum("kij,klj->il", a, u.conj())


def apply_channel(ch: QubitChannel, rho0: np.ndarray) -> np.ndarray:
    rho0 = np.asarray(rho0, dtype=complex)
    v = ch.frame_rotation
    return v @ _mix(ch.weights, ch.unitaries, rho0) @ v.conj().T


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (T, 2, 2)
    scalars: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=complex)
        if self.states.shape != (len(self.times), 2, 2):
            raise PreconditionError("states must have shape (len(times), 2, 2)")
        if np.any(np.diff(self.times) <= 0):
            raise PreconditionError("times must be strictly increasing")
        for name, values in self.scalars.items():
            if len(values) != len(self.times):
                raise PreconditionError(f"scalar {name!r} has the wrong length")

    def __len__(self) -> int:
        return len(self.times)


def _check_grid(times) -> np.ndarray:
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.ndim != 1 or not np.all(np.isfinite(times)):
        raise PreconditionError("time grid must be a finite 1-d sequence")
    if np.any(np.diff(times) <= 0):
        raise PreconditionError("time grid must be strictly increasing")
    return times


def evolve(params: ModelParams, rho0, times, use_hamming=None,
           mode: str | None = None) -> Trajectory:
    """Reduced qubit trajectory on a time grid, with coherence and purity."""
    rho0 = as_density_matrix(rho0)
    times = _check_grid(times)
    spec = rotating_frame_spectrum(params, use_hamming, mode)
    bloch = _mixed_bloch_trajectory(spec.E, spec.weight, params.alpha,
                                    params.omega_drive, times, _bloch_vector(rho0))
    states = _bloch_to_density(bloch)
    return Trajectory(times, states, {
        "coherence": np.abs(states[:, 0, 1]),
        "purity": purity(states),
    })


def _bloch_vector(rho: np.ndarray) -> np.ndarray:
    return np.array([2.0 * rho[0, 1].real, -2.0 * rho[0, 1].imag,
                     (rho[0, 0] - rho[1, 1]).real])


def _bloch_to_density(b: np.ndarray) -> np.ndarray:
    out = np.empty(b.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = 0.5 * (1.0 + b[..., 2])
    out[..., 1, 1] = 0.5 * (1.0 - b[..., 2])
    out[..., 0, 1] = 0.5 * (b[..., 0] - 1j * b[..., 1])
    out[..., 1, 0] = 0.5 * (b[..., 0] + 1j * b[..., 1])
    return out


_CHUNK = 2 ** 21  # time-by-mode cells evaluated at once


def _mixed_bloch_trajectory(E, weights, alpha: float, omega_drive: float,
                            times: np.ndarray, b0: np.ndarray) -> np.ndarray:
    """Bloch vectors of ``V_t (sum_k w_k U_k rho U_k^dag) V_t^dag`` for every time.

    ``U_k = exp(-i H_k t)`` rotates the Bloch vector about ``n_k = (a, 0, E_k)/r_k``
    by ``2 r_k t`` (Rodrigues), so the weighted mixture needs only the
    ``cos``/``sin`` tables of ``2 r_k t`` contracted against per-mode vectors.
    """
    E = np.asarray(E, dtype=float)
    w = np.asarray(weights, dtype=float)
    keep = w > 0
    E, w = E[keep], w[keep]
    r = np.hypot(E, alpha)
    safe = np.where(r > 0, r, 1.0)
    n = np.stack([np.where(r > 0, alpha / safe, 0.0), np.zeros_like(E),
                  np.where(r > 0, E / safe, 1.0)], axis=-1)  # (K, 3)
    along = n * (n @ b0)[:, None]
    fixed = w @ along  # part untouched by the rotation
    perp = w[:, None] * (b0 - along)
    cross = w[:, None] * np.cross(n, b0)
    out = np.empty((len(times), 3))
    step = max(1, _CHUNK // max(1, len(E)))
    for lo in range(0, len(times), step):
        ang = np.multiply.outer(2.0 * times[lo:lo + step], r)
        out[lo:lo + step] = fixed + np.cos(ang) @ perp + np.sin(ang) @ cross
    # frame rotation about z by w t
    phi = omega_drive * times
    c, s = np.cos(phi), np.sin(phi)
    bx, by = out[:, 0].copy(), out[:, 1].copy()
    out[:, 0] = c * bx - s * by
    out[:, 1] = s * bx + c * by
    return out


def dephasing_factor(t, params: ModelParams, use_hamming=None,
                     mode: str | None = None):
    """``sum_i w_i exp(-2 i E_i t)``: the factor multiplying the coherence when ``alpha == 0``.

    ``t`` may be a scalar or an array.
    """
    spec = spectrum(params, mode=_resolve_mode(use_hamming, mode))
    t = np.asarray(t, dtype=float)
    out = np.exp(-2j * np.multiply.outer(t, spec.E)) @ spec.weight
    return out[()] if out.ndim == 0 else out


def closed_evolution(t: float, params: ModelParams) -> np.ndarray:
    """Propagator of the uncoupled driven qubit, ``V_t exp(-i H t)``."""
    if any(g != 0.0 for g in params.g_n):
        raise ContractError("closed_evolution requires all couplings g_n == 0")
    h = mode_hamiltonian(params.beta, params.omega_drive, params.alpha)
    return frame_rotation(t, params.omega_drive) @ herm2_exp(h, t)


def lab_qubit_hamiltonian(t: float, alpha: float, beta: float,
                          omega_drive: float) -> np.ndarray:
    """Driven qubit Hamiltonian ``b sz + a (sy sin wt + sx cos wt)``."""
    wt = omega_drive * t
    return beta * SIGMA_Z + alpha * (np.sin(wt) * SIGMA_Y + np.cos(wt) * SIGMA_X)
