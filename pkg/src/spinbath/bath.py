"""Spectrum and thermal weights of the Ising spin bath.

Bath index convention: ``i = i_1 i_2 ... i_N`` in binary with ``i_1`` the most
significant bit, and bit value ``b`` maps to the sigma^z eigenvalue ``(-1)**b``.
Temperature enters only through the inverse temperature ``theta = 1/kT``
(``k = hbar = 1``); ``theta = 0`` is infinite temperature and
``theta = inf`` is the bath ground state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import CapacityError, ContractError, PreconditionError
from .riccati import riccati_f

N_MAX = 24


@dataclass(frozen=True)
class ModelParams:
    """Physical configuration of qubit, drive and bath.

    ``omega_n``/``g_n`` are the bath frequencies and Ising couplings,
    ``alpha``/``beta`` the transverse and longitudinal drive amplitudes,
    ``omega_drive`` the rotation frequency of the transverse field and
    ``theta`` the inverse bath temperature.
    """

    omega_n: tuple[float, ...]
    g_n: tuple[float, ...]
    alpha: float = 0.0
    beta: float = 0.0
    omega_drive: float = 0.0
    theta: float = 0.0
    uniform: bool = field(init=False, compare=False)

    def __post_init__(self):
        omega_n = tuple(float(w) for w in np.atleast_1d(self.omega_n))
        g_n = tuple(float(g) for g in np.atleast_1d(self.g_n))
        if len(omega_n) < 1:
            raise PreconditionError("bath must contain at least one spin")
        if len(omega_n) != len(g_n):
            raise PreconditionError("omega_n and g_n must have the same length")
        theta = float(self.theta)
        if not theta >= 0.0:
            raise PreconditionError("theta must lie in [0, inf]")
        for name in ("alpha", "beta", "omega_drive"):
            if not math.isfinite(float(getattr(self, name))):
                raise PreconditionError(f"{name} must be finite")
        object.__setattr__(self, "omega_n", omega_n)
        object.__setattr__(self, "g_n", g_n)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "omega_drive", float(self.omega_drive))
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "uniform",
                           len(set(omega_n)) == 1 and len(set(g_n)) == 1)

    @classmethod
    def uniform_bath(cls, n: int, omega: float, g: float, **kw) -> "ModelParams":
        if n < 1:
            raise PreconditionError("bath must contain at least one spin")
        return cls((float(omega),) * n, (float(g),) * n, **kw)

    @property
    def n(self) -> int:
        return len(self.omega_n)

    @property
    def beta_eff(self) -> float:
        """Longitudinal field seen in the frame co-rotating with the drive."""
        return self.beta - 0.5 * self.omega_drive

    def replace(self, **changes) -> "ModelParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class ModeSpectrum:
    """Per-mode bath data, either one row per bath index or per Hamming class.

    ``weight`` is the total thermal weight of the row (``multiplicity`` times
    the per-index Gibbs weight), so the weights always sum to one.
    ``log_rho`` is the log of the per-index weight.  The Riccati eigenvalues
    ``f`` are held in extended precision (``np.longdouble``).
    """

    kind: str  # "enumerate" or "hamming"
    n: int
    label: np.ndarray  # bath index, or Hamming weight k
    E: np.ndarray
    Omega: np.ndarray
    Eplus: np.ndarray
    Eminus: np.ndarray
    weight: np.ndarray
    log_rho: np.ndarray
    log_multiplicity: np.ndarray
    f: np.ndarray

    def __len__(self) -> int:
        return len(self.E)

    @property
    def multiplicity(self) -> list[int]:
        if self.kind == "enumerate":
            return [1] * len(self)
        return [math.comb(self.n, int(k)) for k in self.label]


def _spin_signs(n: int):
    """Yield ``(m, (-1)**i_m)`` over spins m for all indices, MSB first."""
    idx = np.arange(2 ** n, dtype=np.int64)
    for m in range(n):
        yield m, (1 - 2 * ((idx >> (n - 1 - m)) & 1)).astype(float)


def _ground_polarization(omega_n) -> np.ndarray:
    # zero-temperature limit of tanh(-theta * omega_n)
    return -np.sign(np.asarray(omega_n, dtype=float))


def _log_class_factors(theta: float, omega: float) -> tuple[float, float]:
    """``log((1 + delta)/2)`` and ``log((1 - delta)/2)`` with ``delta = tanh(-theta*omega)``."""
    if math.isinf(theta):
        pol = float(_ground_polarization([omega])[0])
        up = math.log((1 + pol) / 2) if pol > -1 else -math.inf
        down = math.log((1 - pol) / 2) if pol < 1 else -math.inf
        return up, down
    x = 2.0 * theta * omega
    return -float(np.logaddexp(0.0, x)), -float(np.logaddexp(0.0, -x))


def _riccati_eigs(E: np.ndarray, alpha: float) -> np.ndarray:
    # extended precision: a rounded double root leaves a residual ~ eps * E**2 / alpha
    if alpha == 0.0:
        return np.zeros(np.shape(E), dtype=np.longdouble)
    return riccati_f(E, alpha, dtype=np.longdouble)


def bath_spectrum(params: ModelParams, beta_override: float | None = None,
                  n_max: int = N_MAX) -> ModeSpectrum:
    """Enumerate all ``2**N`` bath eigenmodes with their Gibbs weights."""
    n = params.n
    if n > n_max:
        raise CapacityError(
            f"N={n} exceeds the enumeration cap {n_max}; use hamming_spectrum "
            "for uniform baths")
    beta = params.beta if beta_override is None else float(beta_override)
    omega = np.asarray(params.omega_n)
    g = np.asarray(params.g_n)
    size = 2 ** n
    E = np.full(size, beta)
    Omega = np.zeros(size)
    Eplus = np.full(size, beta)
    Eminus = np.full(size, -beta)
    theta = params.theta
    ground = np.ones(size) if math.isinf(theta) else None
    pol = _ground_polarization(omega)
    for m, s in _spin_signs(n):
        E += g[m] * s
        Omega += omega[m] * s
        Eplus += (omega[m] + g[m]) * s
        Eminus += (omega[m] - g[m]) * s
        if ground is not None:
            ground *= 0.5 * (1.0 + pol[m] * s)

    if ground is not None:
        weight = ground
        with np.errstate(divide="ignore"):
            log_rho = np.log(weight)
    elif theta == 0.0:
        log_rho = np.full(2 ** n, -n * math.log(2.0))
        weight = np.exp(log_rho)
    else:
        a = -theta * Omega
        log_rho = a - logsumexp(a)
        weight = np.exp(log_rho)

    return ModeSpectrum(
        kind="enumerate", n=n, label=np.arange(2 ** n, dtype=np.int64),
        E=E, Omega=Omega, Eplus=Eplus, Eminus=Eminus, weight=weight,
        log_rho=log_rho, log_multiplicity=np.zeros(2 ** n),
        f=_riccati_eigs(E, params.alpha))


def hamming_spectrum(params: ModelParams,
                     beta_override: float | None = None) -> ModeSpectrum:
    """Aggregate a uniform bath into its ``N + 1`` Hamming-weight classes.

    All weights are formed in log space so that binomial coefficients of
    very large baths never overflow.
    """
    if not params.uniform:
        raise ContractError("hamming_spectrum requires equal omega_n and g_n")
    n = params.n
    beta = params.beta if beta_override is None else float(beta_override)
    omega = params.omega_n[0]
    g = params.g_n[0]
    k = np.arange(n + 1, dtype=np.int64)
    kf = k.astype(float)
    spin_sum = n - 2 * kf
    E = g * spin_sum + beta
    Omega = omega * spin_sum
    Eplus = (omega + g) * spin_sum + beta
    Eminus = (omega - g) * spin_sum - beta
    log_mult = gammaln(n + 1.0) - gammaln(kf + 1.0) - gammaln(n - kf + 1.0)

    up, down = _log_class_factors(params.theta, omega)
    with np.errstate(invalid="ignore"):
        # 0 * -inf only arises for empty classes, which carry no weight
        log_rho = np.where(n - k > 0, (n - kf) * up, 0.0) + np.where(k > 0, kf * down, 0.0)
    log_w = log_mult + log_rho
    log_w = log_w - logsumexp(log_w)
    weight = np.exp(log_w)
    return ModeSpectrum(
        kind="hamming", n=n, label=k, E=E, Omega=Omega, Eplus=Eplus,
        Eminus=Eminus, weight=weight, log_rho=log_w - log_mult,
        log_multiplicity=log_mult, f=_riccati_eigs(E, params.alpha))


def spectrum(params: ModelParams, beta_override: float | None = None,
             mode: str = "auto") -> ModeSpectrum:
    """Dispatch between enumeration and Hamming aggregation.

    ``auto`` aggregates only when the bath is uniform and too large for the
    dense oracle (N > 12).
    """
    if mode == "auto":
        mode = "hamming" if params.uniform and params.n > 12 else "enumerate"
    if mode == "hamming":
        return hamming_spectrum(params, beta_override)
    if mode == "enumerate":
        return bath_spectrum(params, beta_override)
    raise PreconditionError(f"unknown spectrum mode {mode!r}")


def _bits(index: int, n: int) -> list[int]:
    return [(index >> (n - 1 - m)) & 1 for m in range(n)]


def product_weight(params: ModelParams, index: int) -> float:
    """Gibbs weight of one bath index from the product form of the thermal state."""
    n = params.n
    if not 0 <= index < 2 ** n:
        raise IndexError(f"bath index {index} out of range for N={n}")
    if math.isinf(params.theta):
        pols = _ground_polarization(params.omega_n)
    else:
        pols = np.tanh(-params.theta * np.asarray(params.omega_n))
    w = 1.0
    for pol, b in zip(pols, _bits(index, n)):
        w *= 0.5 * (1.0 + pol * (1 - 2 * b))
    return float(w)


def zero_temperature_index(params: ModelParams) -> int:
    """Bath index minimising the bath energy; ties go to the smallest index."""
    n = params.n
    index = 0
    for m, w in enumerate(params.omega_n):
        if w > 0:
            index |= 1 << (n - 1 - m)
    return index
