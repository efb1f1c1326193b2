"""Brute-force reference dynamics on the full qubit+bath Hilbert space.

Everything here works with dense ``2**(N+1)`` matrices ordered as
``kron(qubit, bath)`` so the qubit index labels the 2x2 block structure.
"""
from __future__ import annotations

import functools
import warnings

import numba
import numpy as np
from scipy.sparse.csgraph import connected_components

from .bath import ModelParams, bath_spectrum
from .errors import CapacityError
from .qubit import as_density_matrix, partial_trace_blocks, split_blocks
from .riccati import riccati_f

N_CAP = 12


class OracleAccuracyWarning(UserWarning):
    """The ODE step is coarse relative to the generator's spectral radius."""


def _check_cap(params: ModelParams, cap: int = N_CAP) -> None:
    if params.n > cap:
        raise CapacityError(f"dense oracle supports N <= {cap}, got N={params.n}")


def _diagonal_blocks(params: ModelParams, beta_value: float):
    spec = bath_spectrum(params, beta_override=beta_value)
    return spec.Eplus, spec.Eminus


def build_full_hamiltonian(params: ModelParams,
                           beta_value: float | None = None) -> np.ndarray:
    """Static Hamiltonian ``[[H+, a I], [a I, H-]]`` at longitudinal field ``beta_value``."""
    _check_cap(params)
    beta_value = params.beta if beta_value is None else beta_value
    ep, em = _diagonal_blocks(params, beta_value)
    d = len(ep)
    h = np.zeros((2 * d, 2 * d), dtype=complex)
    h[np.arange(d), np.arange(d)] = ep
    h[d + np.arange(d), d + np.arange(d)] = em
    h[np.arange(d), d + np.arange(d)] = params.alpha
    h[d + np.arange(d), np.arange(d)] = params.alpha
    return h


def _drive_operator(params: ModelParams) -> np.ndarray:
    """``a |0><1| (x) I``: the part of the lab Hamiltonian multiplied by ``exp(-i w t)``."""
    d = 2 ** params.n
    a = np.zeros((2 * d, 2 * d), dtype=complex)
    a[np.arange(d), d + np.arange(d)] = params.alpha
    return a


def lab_hamiltonian(t: float, params: ModelParams) -> np.ndarray:
    """Time-dependent total Hamiltonian with the transverse field rotating at ``w``."""
    _check_cap(params)
    h = build_full_hamiltonian(params).copy()
    a = _drive_operator(params)
    static = h - a - a.conj().T
    ph = np.exp(-1j * params.omega_drive * t)
    return static + ph * a + np.conj(ph) * a.conj().T


@functools.lru_cache(maxsize=64)
def _heff_eigh(params: ModelParams):
    h = build_full_hamiltonian(params, params.beta_eff)
    return np.linalg.eigh(h)


def full_propagator_exact(t: float, params: ModelParams) -> np.ndarray:
    """``exp(i K t) exp(-i H(beta - w/2) t)`` with ``K = -(w/2) sz (x) I``."""
    _check_cap(params)
    vals, vecs = _heff_eigh(params)
    evo = (vecs * np.exp(-1j * vals * t)) @ vecs.conj().T
    d = 2 ** params.n
    ph = 0.5 * params.omega_drive * t
    frame = np.concatenate([np.full(d, np.exp(-1j * ph)), np.full(d, np.exp(1j * ph))])
    return frame[:, None] * evo


@numba.njit(cache=True)
def _rhs(h0, a, phase, y, hcur, out):
    # out = -i (h0 + phase a + conj(phase) a^dag) y, blockwise
    nb, m, _ = h0.shape
    pc = np.conj(phase)
    for b in range(nb):
        for i in range(m):
            for k in range(m):
                hcur[i, k] = -1j * (h0[b, i, k] + phase * a[b, i, k]
                                    + pc * np.conj(a[b, k, i]))
        for i in range(m):
            for j in range(m):
                acc = 0j
                for k in range(m):
                    acc += hcur[i, k] * y[b, k, j]
                out[b, i, j] = acc


@numba.njit(cache=True)
def _axpy(y, c, k, out):
    # out = y + c * k, elementwise over the block stack
    nb, m, _ = y.shape
    for b in range(nb):
        for i in range(m):
            for j in range(m):
                out[b, i, j] = y[b, i, j] + c * k[b, i, j]


@numba.njit(cache=True)
def _rk4_blocks(h0, a, omega, t_out, dt):
    nb, m, _ = h0.shape
    out = np.empty((t_out.shape[0], nb, m, m), dtype=np.complex128)
    y = np.zeros((nb, m, m), dtype=np.complex128)
    for b in range(nb):
        for i in range(m):
            y[b, i, i] = 1.0
    k1 = np.empty_like(y)
    k2 = np.empty_like(y)
    k3 = np.empty_like(y)
    k4 = np.empty_like(y)
    tmp = np.empty_like(y)
    hcur = np.empty((m, m), dtype=np.complex128)
    t = 0.0
    for n in range(t_out.shape[0]):
        span = t_out[n] - t
        steps = int(np.ceil(span / dt - 1e-9)) if span > 0 else 0
        if steps > 0:
            step = span / steps
            t0 = t
            for s in range(steps):
                ts = t0 + s * step
                _rhs(h0, a, np.exp(-1j * omega * ts), y, hcur, k1)
                _axpy(y, 0.5 * step, k1, tmp)
                _rhs(h0, a, np.exp(-1j * omega * (ts + 0.5 * step)), tmp, hcur, k2)
                _axpy(y, 0.5 * step, k2, tmp)
                _rhs(h0, a, np.exp(-1j * omega * (ts + 0.5 * step)), tmp, hcur, k3)
                _axpy(y, step, k3, tmp)
                _rhs(h0, a, np.exp(-1j * omega * (ts + step)), tmp, hcur, k4)
                c = step / 6.0
                for b in range(nb):
                    for i in range(m):
                        for j in range(m):
                            y[b, i, j] += c * (k1[b, i, j] + 2.0 * k2[b, i, j]
                                               + 2.0 * k3[b, i, j] + k4[b, i, j])
            t = t_out[n]
        out[n] = y
    return out


def _sectors(h0: np.ndarray, a: np.ndarray) -> list[np.ndarray]:
    """Index sets of the invariant subspaces shared by ``h0``, ``a`` and ``a^dag``."""
    pattern = (np.abs(h0) + np.abs(a) + np.abs(a.T)) > 0
    _, labels = connected_components(pattern, directed=False)
    return [np.flatnonzero(labels == c) for c in range(labels.max() + 1)]


def integrate_rotating_drive(h0: np.ndarray, a: np.ndarray, omega: float,
                             times, dt: float) -> np.ndarray:
    """RK4 propagators of ``i dU/dt = (h0 + e^{-iwt} a + e^{iwt} a^dag) U`` from ``U(0) = I``.

    The dense generator is split into the invariant sectors of its sparsity
    graph and each sector's mean diagonal energy is integrated analytically,
    so RK4 only sees the traceless remainder.  Returns ``(len(times), D, D)``.
    """
    times = np.asarray(times, dtype=float)
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValueError("output times must be nonnegative and nondecreasing")
    dim = h0.shape[0]
    out = np.zeros((len(times), dim, dim), dtype=complex)
    by_size: dict[int, list[np.ndarray]] = {}
    for sec in _sectors(h0, a):
        by_size.setdefault(len(sec), []).append(sec)
    radius = 0.0
    for m, secs in by_size.items():
        idx = np.array(secs)  # (B, m)
        hb = h0[idx[:, :, None], idx[:, None, :]]
        ab = a[idx[:, :, None], idx[:, None, :]]
        shift = np.trace(hb, axis1=1, axis2=2).real / m
        hb = hb - shift[:, None, None] * np.eye(m)
        # ||H(t)||_2 <= ||h0||_2 + 2 ||a||_2 on every sector
        bound = (np.linalg.norm(hb, ord=2, axis=(1, 2))
                 + 2 * np.linalg.norm(ab, ord=2, axis=(1, 2))).max()
        radius = max(radius, float(bound))
        blocks = _rk4_blocks(hb, ab, float(omega), times, float(dt))
        phases = np.exp(-1j * np.multiply.outer(times, shift))
        blocks = blocks * phases[:, :, None, None]
        for b, sec in enumerate(secs):
            out[:, sec[:, None], sec[None, :]] = blocks[:, b]
    if dt * radius > 1e-2:
        warnings.warn(f"dt * spectral radius = {dt * radius:.3g} exceeds 1e-2; "
                      "RK4 error may exceed the usual bound",
                      OracleAccuracyWarning, stacklevel=2)
    return out


def full_propagators_ode(times, params: ModelParams, dt: float = 1e-3) -> np.ndarray:
    """Lab-frame propagators at each of ``times`` by classical RK4 with step ``<= dt``."""
    _check_cap(params)
    a = _drive_operator(params)
    static = build_full_hamiltonian(params) - a - a.conj().T
    return integrate_rotating_drive(static, a, params.omega_drive, times, dt)


def full_propagator_ode(t: float, params: ModelParams, dt: float = 1e-3) -> np.ndarray:
    return full_propagators_ode([t], params, dt)[0]


def unitarity_defect(u: np.ndarray) -> float:
    return float(np.linalg.norm(u @ u.conj().T - np.eye(u.shape[0])))


def bath_state_diagonal(params: ModelParams) -> np.ndarray:
    """Gibbs weights of the bath in the computational basis."""
    return bath_spectrum(params).weight


def reduce_with(u: np.ndarray, rho0: np.ndarray, bath_weights: np.ndarray) -> np.ndarray:
    """``Tr_E(U (rho0 (x) rho_E) U^dag)`` for a diagonal bath state."""
    joint = u @ np.kron(rho0, np.diag(bath_weights)) @ np.swapaxes(u.conj(), -1, -2)
    if joint.ndim == 2:
        return partial_trace_blocks(split_blocks(joint))
    return np.stack([partial_trace_blocks(split_blocks(j)) for j in joint])


def reduced_from_full(rho0, params: ModelParams, t: float, method: str = "exact",
                      dt: float = 1e-3) -> np.ndarray:
    """Ground-truth reduced qubit state from the full unitary evolution."""
    return reduced_trajectory_from_full(rho0, params, [t], method, dt)[0]


def reduced_trajectory_from_full(rho0, params: ModelParams, times,
                                 method: str = "exact", dt: float = 1e-3) -> np.ndarray:
    rho0 = as_density_matrix(rho0)
    times = np.asarray(times, dtype=float)
    if method == "exact":
        us = np.stack([full_propagator_exact(t, params) for t in times])
    elif method == "ode":
        us = full_propagators_ode(times, params, dt)
    else:
        raise ValueError(f"unknown oracle method {method!r}")
    return reduce_with(us, rho0, bath_state_diagonal(params))


def block_diag_residual(params: ModelParams, f_override=None,
                        return_blocks: bool = False):
    """Relative size of the off-diagonal blocks after the Riccati similarity transform.

    Builds ``X = diag(f(E_i))``, ``U_X = [[I, -X^dag], [X, I]]`` and its inverse
    ``(I + X X^dag)^{-1} [[I, X^dag], [-X, I]]`` (valid since X is normal),
    then measures ``U_X^{-1} H U_X``.  ``f_override`` replaces the Riccati
    eigenvalues (used for fault injection).
    """
    _check_cap(params, 10)
    h = build_full_hamiltonian(params)
    d = 2 ** params.n
    if f_override is not None:
        f = np.asarray(f_override, dtype=float)
    elif params.alpha == 0.0:
        f = np.zeros(d)
    else:
        f = riccati_f(bath_spectrum(params).E, params.alpha)
    x = np.diag(f).astype(complex)
    eye = np.eye(d)
    ux = np.block([[eye, -x.conj().T], [x, eye]])
    inv_norm = np.linalg.inv(eye + x @ x.conj().T)
    z = np.zeros((d, d))
    ux_inv = np.block([[inv_norm, z], [z, inv_norm]]) @ np.block([[eye, x.conj().T], [-x, eye]])
    t = ux_inv @ h @ ux
    off = np.sqrt(np.linalg.norm(t[:d, d:]) ** 2 + np.linalg.norm(t[d:, :d]) ** 2)
    res = float(off / np.linalg.norm(h))
    if return_blocks:
        return res, t[:d, :d], t[d:, d:]
    return res
