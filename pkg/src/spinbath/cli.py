"""Command-line entry point: ``spinbath {spectrum,evolve,coherence,fidelity,verify,sweep}``.

Exit codes: 0 ok, 1 verification failure, 2 configuration error, 3 capacity error.
"""
from __future__ import annotations

import argparse
import math
import sys
import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import config as cfgmod
from .adiabatic import HALF_PI, fidelity_via_channel, open_fidelity
from .bath import ModelParams, spectrum
from .config import ConfigError, RunConfig
from .dynamics import build_channel, evolve, mode_unitary, mode_unitary_riccati, rotating_frame_spectrum
from .errors import CapacityError, PreconditionError
from .oracle import (
    OracleAccuracyWarning,
    block_diag_residual,
    reduced_trajectory_from_full,
)
from .qubit import bloch_state, density_violations, trace_distance
from .riccati import riccati_residual

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_CAPACITY = 0, 1, 2, 3
VERIFY_N_MAX = 6


def fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if value == 0.0:
        value = 0.0  # no "-0"
    return format(value, ".17g")


def write_csv(rows, header, out) -> None:
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(c if isinstance(c, str) else fmt(c) for c in row) + "\n")


def cmd_spectrum(cfg: RunConfig, mode: str):
    spec = spectrum(cfg.params, mode=mode)
    header = ["index_or_class", "multiplicity", "E", "Omega", "Eplus", "Eminus", "weight", "f"]
    rows = zip(spec.label, spec.multiplicity, spec.E, spec.Omega, spec.Eplus,
               spec.Eminus, spec.weight, spec.f)
    return header, rows


def _need_state(cfg: RunConfig) -> np.ndarray:
    if cfg.rho0 is None:
        raise ConfigError("this command needs an [initial_state] section")
    return cfg.rho0


def cmd_evolve(cfg: RunConfig, mode: str):
    traj = evolve(cfg.params, _need_state(cfg), cfg.times, mode=mode)
    s = traj.states
    header = ["t", "rho00_re", "rho01_re", "rho01_im", "rho11_re", "coherence", "purity"]
    rows = zip(traj.times, s[:, 0, 0].real, s[:, 0, 1].real, s[:, 0, 1].imag,
               s[:, 1, 1].real, traj.scalars["coherence"], traj.scalars["purity"])
    return header, rows


def cmd_coherence(cfg: RunConfig, mode: str):
    traj = evolve(cfg.params, _need_state(cfg), cfg.times, mode=mode)
    return ["t", "coherence"], zip(traj.times, traj.scalars["coherence"])


def _closed_form_applies(cfg: RunConfig, params: ModelParams) -> bool:
    return abs(cfg.phi - HALF_PI) <= 1e-12 and params.uniform


def fidelity_columns(cfg: RunConfig, mode: str, params: ModelParams | None = None,
                     x: float | None = None):
    params = cfg.params if params is None else params
    acfg = cfg.adiabatic(params, x)
    channel = np.atleast_1d(fidelity_via_channel(cfg.times, acfg, mode=mode))
    closed = None
    if _closed_form_applies(cfg, params):
        closed = np.atleast_1d(open_fidelity(cfg.times, acfg))
    return closed, channel


def cmd_fidelity(cfg: RunConfig, mode: str):
    closed, channel = fidelity_columns(cfg, mode)
    col = [""] * len(channel) if closed is None else [fmt(v) for v in closed]
    return ["t", "F_closed_form", "F_channel"], zip(cfg.times, col, channel)


def cmd_sweep(cfg: RunConfig, mode: str, var: str | None, values):
    if var is None:
        raise ConfigError("sweep needs --sweep VAR=v1,v2,... or a [sweep] section")
    if len(values) * len(cfg.times) > 10 ** 4:
        raise ConfigError("sweep grid exceeds 10^4 cells")
    rows = []
    for v in values:
        params, x = cfg.params, None
        if var == "x":
            x = v
            params = params.replace(omega_drive=2.0 * cfg.beta0 * v)
        elif var == "g":
            params = params.replace(g_n=(v,) * params.n)
        elif var == "theta":
            params = params.replace(theta=v)
        elif var == "N":
            n = int(v)
            if n != v or n < 1 or not cfg.params.uniform:
                raise ConfigError("sweeping N needs positive integers and a uniform bath")
            params = ModelParams.uniform_bath(n, cfg.params.omega_n[0], cfg.params.g_n[0],
                                              alpha=params.alpha, beta=params.beta,
                                              omega_drive=params.omega_drive,
                                              theta=params.theta)
        _, channel = fidelity_columns(cfg, mode, params, x)
        label = str(int(v)) if var == "N" else fmt(v)
        rows.extend((label, t, f) for t, f in zip(cfg.times, channel))
    return [var, "t", "F"], rows


# --- verification -------------------------------------------------------------

VERIFY_TOLERANCES = {
    "trace_distance_exact": 1e-10,
    "trace_distance_ode": 1e-6,
    "riccati_residual": 1e-12,
    "block_diag_residual": 1e-12,
    "channel_trace_positivity": 1e-10,
    "riccati_unitary_form": 1e-10,
}


@dataclass
class CheckResult:
    name: str
    value: float
    tol: float

    @property
    def ok(self) -> bool:
        return bool(self.value <= self.tol)


def random_params(rng: np.random.Generator, n: int, theta: float) -> ModelParams:
    return ModelParams(rng.uniform(-2, 2, n), rng.uniform(-2, 2, n),
                       alpha=rng.uniform(-2, 2), beta=rng.uniform(-2, 2),
                       omega_drive=rng.uniform(0, 4), theta=theta)


def random_state(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    return bloch_state(*(v / np.linalg.norm(v) * rng.uniform(0, 1)))


def verification_cases(seed: int, sets_per_n: int = 2):
    rng = np.random.default_rng(seed)
    thetas = (0.0, 1.0, math.inf)
    k = 0
    for n in range(1, VERIFY_N_MAX + 1):
        for _ in range(sets_per_n):
            yield random_params(rng, n, thetas[k % 3]), random_state(rng)
            k += 1


def verify_case(params: ModelParams, rho0: np.ndarray, times, dt: float = 1e-3,
                fault: str | None = None) -> dict[str, float]:
    """Worst-case deviations of one parameter set against every oracle."""
    if params.n > VERIFY_N_MAX:
        raise CapacityError(f"verify supports N <= {VERIFY_N_MAX}, got N={params.n}")
    traj = evolve(params, rho0, times, mode="enumerate")
    exact = reduced_trajectory_from_full(rho0, params, times, "exact")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OracleAccuracyWarning)
        ode = reduced_trajectory_from_full(rho0, params, times, "ode", dt)
    out = {
        "trace_distance_exact": float(np.max(trace_distance(traj.states, exact))),
        "trace_distance_ode": float(np.max(trace_distance(traj.states, ode))),
    }
    spec = rotating_frame_spectrum(params, mode="enumerate")
    f = spec.f + (1e-3 if fault == "riccati" else 0.0)
    if params.alpha != 0.0:
        out["riccati_residual"] = float(np.max(riccati_residual(f, spec.E, params.alpha)))
    else:
        out["riccati_residual"] = 0.0
    raw_f = None
    if fault == "riccati":
        raw_f = spectrum(params, mode="enumerate").f + 1e-3
    out["block_diag_residual"] = block_diag_residual(params, f_override=raw_f)
    worst = 0.0
    for t in times:
        ch = build_channel(t, params, mode="enumerate")
        a, b = ch.completeness()
        worst = max(worst, np.abs(a - np.eye(2)).max(), np.abs(b - np.eye(2)).max())
    v = density_violations(traj.states)
    worst = max(worst, v["trace"], v["hermiticity"], -v["min_eigenvalue"])
    # Riccati-assembled propagators against the closed-form ones
    t_last = float(times[-1])
    fspec = spec if fault is None else replace(spec, f=f)
    diff = np.abs(mode_unitary_riccati(fspec, t_last, params)
                  - mode_unitary(spec, t_last, params)).max()
    out["channel_trace_positivity"] = float(worst)
    out["riccati_unitary_form"] = float(diff)
    return out


def cmd_verify(cfg: RunConfig, seed: int, fault: str | None, report, sets_per_n: int = 2,
               details=None):
    if cfg.params.n > VERIFY_N_MAX:
        raise CapacityError(f"verify supports N <= {VERIFY_N_MAX}, got N={cfg.params.n}")
    times = np.linspace(0.0, 5.0, 21)
    cases = [(cfg.params, cfg.rho0 if cfg.rho0 is not None else bloch_state(0.6, 0.0, 0.8))]
    cases += list(verification_cases(seed, sets_per_n))
    worst = dict.fromkeys(VERIFY_TOLERANCES, 0.0)
    for k, (params, rho0) in enumerate(cases):
        values = verify_case(params, rho0, times, fault=fault)
        for name, value in values.items():
            worst[name] = max(worst[name], value)
        if details is not None:
            details.write(f"case {k} N={params.n} theta={fmt(params.theta)}: "
                          + " ".join(f"{n}={v:.2e}" for n, v in values.items()) + "\n")
    results = [CheckResult(name, worst[name], tol) for name, tol in VERIFY_TOLERANCES.items()]
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        report.write(f"{status} {r.name}: max={r.value:.3e} tol={r.tol:.0e}\n")
    failed = [r.name for r in results if not r.ok]
    if failed:
        report.write("verification failed: " + ", ".join(failed) + "\n")
        return EXIT_VERIFY
    report.write(f"all {len(results)} checks passed over {len(cases)} parameter sets\n")
    return EXIT_OK


def _parse_sweep(text: str | None):
    if text is None:
        return None, []
    if "=" not in text:
        raise ConfigError("--sweep expects VAR=v1,v2,...")
    var, values = text.split("=", 1)
    var = var.strip()
    if var not in cfgmod.SWEEP_VARS:
        raise ConfigError(f"sweep variable must be one of {cfgmod.SWEEP_VARS}")
    return var, cfgmod.parse_list(values, "--sweep")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spinbath", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=["spectrum", "evolve", "coherence", "fidelity",
                                       "verify", "sweep"])
    p.add_argument("--config", required=True, help="run configuration file")
    p.add_argument("--output", help="CSV destination (default: config output.path or stdout)")
    p.add_argument("--mode", choices=cfgmod.MODES, help="bath spectrum path")
    p.add_argument("--seed", type=int, help="seed of the verify suite")
    p.add_argument("--sweep", help="sweep spec VAR=v1,v2,... (VAR in x, g, theta, N)")
    p.add_argument("--tol-report", action="store_true",
                   help="print state-invariant extremes (or verify details) to stderr")
    p.add_argument("--inject-fault", choices=["riccati"], help=argparse.SUPPRESS)
    return p


def _open_output(path: str):
    if path in (None, "", "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline="\n"), True


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = cfgmod.load(args.config)
        mode = args.mode or cfg.mode
        if args.command == "verify":
            seed = cfg.seed if args.seed is None else args.seed
            report = sys.stdout if args.output is None else open(args.output, "w", encoding="utf-8")
            try:
                return cmd_verify(cfg, seed, args.inject_fault, report,
                                  details=sys.stderr if args.tol_report else None)
            finally:
                if report is not sys.stdout:
                    report.close()
        if args.command == "spectrum":
            header, rows = cmd_spectrum(cfg, mode)
        elif args.command == "evolve":
            header, rows = cmd_evolve(cfg, mode)
        elif args.command == "coherence":
            header, rows = cmd_coherence(cfg, mode)
        elif args.command == "fidelity":
            header, rows = cmd_fidelity(cfg, mode)
        else:
            var, values = _parse_sweep(args.sweep)
            if var is None:
                var, values = cfg.sweep_var, cfg.sweep_values
            header, rows = cmd_sweep(cfg, mode, var, values)
        rows = list(rows)
        if args.tol_report and args.command in ("evolve", "coherence"):
            traj = evolve(cfg.params, cfg.rho0, cfg.times, mode=mode)
            for k, v in density_violations(traj.states).items():
                sys.stderr.write(f"{k}: {v:.3e}\n")
        out, close = _open_output(args.output if args.output is not None else cfg.output)
        try:
            write_csv(rows, header, out)
        finally:
            if close:
                out.close()
        return EXIT_OK
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except CapacityError as exc:
        sys.stderr.write(f"capacity error: {exc}\n")
        return EXIT_CAPACITY
    except PreconditionError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
