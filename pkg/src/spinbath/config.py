"""Run configuration: an INI-style file with ``[model]``, ``[drive]``, ``[time]``,
``[initial_state]``, ``[run]``, ``[output]`` and ``[sweep]`` sections.

Example::

    [model]
    N = 4
    omega = 1.0          # uniform shorthand; or omega_n = 1.0, 0.7, ...
    g = 0.1              # or g_n = ...
    theta = inf          # inverse temperature: decimal, "inf" or "zero"

    [drive]
    beta0 = 1.0          # or alpha = ..., beta = ...
    phi = 1.5707963267948966
    x = 0.1              # or omega = rotation frequency

    [time]
    t_start = 0
    t_end = 10
    steps = 101

    [initial_state]
    bx = 0
    by = 0
    bz = 1               # or rho00, rho11, rho01_re, rho01_im
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .adiabatic import AdiabaticConfig
from .bath import ModelParams
from .errors import PreconditionError, SpinBathError
from .qubit import as_density_matrix, bloch_state

MODES = ("enumerate", "hamming", "auto")
SWEEP_VARS = ("x", "g", "theta", "N")


class ConfigError(SpinBathError):
    """The configuration file is missing, malformed or inconsistent."""


def parse_real(text: str, name: str) -> float:
    value = text.strip().lower()
    if value in ("inf", "+inf", "infinity"):
        return math.inf
    if value == "zero":
        return 0.0
    try:
        out = float(value)
    except ValueError:
        raise ConfigError(f"{name}: expected a decimal number, got {text!r}") from None
    if math.isnan(out):
        raise ConfigError(f"{name}: NaN is not allowed")
    return out


def parse_list(text: str, name: str) -> list[float]:
    items = [s for s in text.replace(";", ",").split(",") if s.strip()]
    if not items:
        raise ConfigError(f"{name}: empty list")
    return [parse_real(s, name) for s in items]


@dataclass
class RunConfig:
    params: ModelParams
    beta0: float
    phi: float
    x: float
    times: np.ndarray
    rho0: np.ndarray | None = None
    mode: str = "auto"
    output: str = "-"
    output_format: str = "csv"
    seed: int = 0
    sweep_var: str | None = None
    sweep_values: list[float] = field(default_factory=list)

    def adiabatic(self, params: ModelParams | None = None, x: float | None = None,
                  ) -> AdiabaticConfig:
        bath = self.params if params is None else params
        return AdiabaticConfig(self.beta0, self.phi, self.x if x is None else x, bath)


def _get(sec, key, name):
    return parse_real(sec[key], f"{name}.{key}")


def _model(cp) -> dict:
    if not cp.has_section("model"):
        raise ConfigError("missing [model] section")
    sec = cp["model"]
    n = int(_get(sec, "N", "model")) if "N" in sec else None

    def seq(single, multi):
        if (single in sec) == (multi in sec):
            raise ConfigError(f"model: give exactly one of {single!r} or {multi!r}")
        if multi in sec:
            values = parse_list(sec[multi], f"model.{multi}")
            if n is not None and len(values) != n:
                raise ConfigError(f"model.{multi}: expected {n} values")
            return values
        if n is None:
            raise ConfigError(f"model: uniform {single!r} requires N")
        return [_get(sec, single, "model")] * n

    omega_n = seq("omega", "omega_n")
    g_n = seq("g", "g_n")
    theta = _get(sec, "theta", "model") if "theta" in sec else 0.0
    return {"omega_n": omega_n, "g_n": g_n, "theta": theta}


def _drive(cp) -> tuple[float, float, float, float, float]:
    """Returns ``alpha, beta, omega_drive, beta0, phi``."""
    sec = cp["drive"] if cp.has_section("drive") else {}
    ab = "alpha" in sec or "beta" in sec
    polar = "beta0" in sec or "phi" in sec
    if ab == polar:
        raise ConfigError("drive: give exactly one of {alpha, beta} or {beta0, phi}")
    if ab:
        alpha = _get(sec, "alpha", "drive") if "alpha" in sec else 0.0
        beta = _get(sec, "beta", "drive") if "beta" in sec else 0.0
        beta0 = math.hypot(alpha, beta)
        phi = math.atan2(alpha, beta)
    else:
        if "beta0" not in sec:
            raise ConfigError("drive: beta0 is required with phi")
        beta0 = _get(sec, "beta0", "drive")
        phi = _get(sec, "phi", "drive") if "phi" in sec else 0.5 * math.pi
        alpha = beta0 * math.sin(phi)
        beta = beta0 * math.cos(phi)
    if "omega" in sec and "x" in sec:
        raise ConfigError("drive: give at most one of 'omega' or 'x'")
    if "x" in sec:
        if beta0 <= 0:
            raise ConfigError("drive.x requires a nonzero field magnitude")
        omega = 2.0 * beta0 * _get(sec, "x", "drive")
    else:
        omega = _get(sec, "omega", "drive") if "omega" in sec else 0.0
    return alpha, beta, omega, beta0, phi


def _times(cp) -> np.ndarray:
    if not cp.has_section("time"):
        raise ConfigError("missing [time] section")
    sec = cp["time"]
    try:
        t0 = _get(sec, "t_start", "time")
        t1 = _get(sec, "t_end", "time")
        steps = int(sec["steps"])
    except KeyError as exc:
        raise ConfigError(f"time: missing key {exc}") from None
    except ValueError:
        raise ConfigError("time.steps must be an integer") from None
    if steps == 1 and t1 == t0:
        return np.array([t0])
    if steps < 2 or not t1 > t0:
        raise ConfigError("time: need steps >= 2 and t_end > t_start "
                          "(or steps = 1 with t_end == t_start)")
    return np.linspace(t0, t1, steps)


def _initial_state(cp) -> np.ndarray | None:
    if not cp.has_section("initial_state"):
        return None
    sec = cp["initial_state"]
    bloch = any(k in sec for k in ("bx", "by", "bz"))
    matrix = any(k in sec for k in ("rho00", "rho11", "rho01_re", "rho01_im"))
    if bloch == matrix:
        raise ConfigError("initial_state: give exactly one of a Bloch vector "
                          "(bx, by, bz) or matrix entries (rho00, rho11, rho01_re, rho01_im)")
    try:
        if bloch:
            b = [_get(sec, k, "initial_state") if k in sec else 0.0 for k in ("bx", "by", "bz")]
            return bloch_state(*b)
        r00 = _get(sec, "rho00", "initial_state")
        r11 = _get(sec, "rho11", "initial_state") if "rho11" in sec else 1.0 - r00
        off = complex(_get(sec, "rho01_re", "initial_state") if "rho01_re" in sec else 0.0,
                      _get(sec, "rho01_im", "initial_state") if "rho01_im" in sec else 0.0)
        return as_density_matrix([[r00, off], [off.conjugate(), r11]])
    except PreconditionError as exc:
        raise ConfigError(f"initial_state: {exc}") from None
    except KeyError as exc:
        raise ConfigError(f"initial_state: missing key {exc}") from None


def _sweep(cp) -> tuple[str | None, list[float]]:
    if not cp.has_section("sweep"):
        return None, []
    sec = cp["sweep"]
    var = sec.get("var", "").strip()
    if var not in SWEEP_VARS:
        raise ConfigError(f"sweep.var must be one of {SWEEP_VARS}")
    if "values" not in sec:
        raise ConfigError("sweep: missing 'values'")
    return var, parse_list(sec["values"], "sweep.values")


def loads(text: str) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keep "N" case-sensitive
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    model = _model(cp)
    alpha, beta, omega, beta0, phi = _drive(cp)
    try:
        params = ModelParams(model["omega_n"], model["g_n"], alpha=alpha, beta=beta,
                             omega_drive=omega, theta=model["theta"])
    except PreconditionError as exc:
        raise ConfigError(str(exc)) from None
    run = cp["run"] if cp.has_section("run") else {}
    mode = run.get("mode", "auto").strip()
    if mode not in MODES:
        raise ConfigError(f"run.mode must be one of {MODES}")
    out = cp["output"] if cp.has_section("output") else {}
    fmt = out.get("format", "csv").strip()
    if fmt != "csv":
        raise ConfigError("output.format: only 'csv' is supported")
    try:
        seed = int(run.get("seed", "0"))
    except ValueError:
        raise ConfigError("run.seed must be an integer") from None
    var, values = _sweep(cp)
    return RunConfig(
        params=params, beta0=beta0, phi=phi,
        x=omega / (2.0 * beta0) if beta0 > 0 else 0.0,
        times=_times(cp), rho0=_initial_state(cp), mode=mode,
        output=out.get("path", "-").strip(), output_format=fmt, seed=seed,
        sweep_var=var, sweep_values=values)


def load(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return loads(text)
