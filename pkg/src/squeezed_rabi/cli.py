"""Command-line driver: parameter sweeps written as CSV.

Every command prints ``#``-prefixed metadata lines (tool version and the
resolved configuration), one header row, then data rows.  Numbers are
rendered with 12 significant digits.  Exit codes: 0 success, 1 invalid
configuration, 2 numerical failure.

Options may also come from ``--config FILE`` holding ``key = value``
lines (keys are the long option names, dashes or underscores); command
line flags win over the file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, dynamics, exact, gsrwa
from .errors import NumericalError
from .fock import FockTruncation, ModelParams

ANALYTIC = ("gsrwa", "gsrwa-full", "gvm", "grwa")
ALL_METHODS = ANALYTIC + ("exact",)

HEADERS = {
    "spectrum": ["g_over_omega", "method", "level_index", "energy_over_omega", "converged"],
    "dynamics": ["t_scaled", "method", "population"],
    "variance": ["g", "delta_over_omega", "method", "delta_p", "delta_x", "product"],
    "residuals": ["g", "method", "n", "residual_crw", "residual_two_photon"],
    "convergence": ["n_max", "level_index", "energy"],
}


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors are config errors (exit 1), not argparse's default 2
    def error(self, message):
        raise ConfigError(message)


def fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format(float(value), ".12g")


# --- config ------------------------------------------------------------------

def read_config_file(path: str) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value file; flags override it")
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--tau", type=float, default=1.0)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--g", type=float, help="single coupling value")
    g.add_argument(
        "--g-range",
        help="START:STOP:COUNT, evenly spaced and strictly increasing",
    )
    p.add_argument("--methods", default="gsrwa,gvm,exact")
    p.add_argument("--n-levels", type=int, default=6)
    p.add_argument("--n-max", type=int, help="oracle cutoff (default picks by g/omega)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    p.add_argument("--out", help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="squeezed-rabi",
        description="Anisotropic Rabi model spectra, squeezing and dynamics as CSV.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="lowest levels versus g")
    _common(p)

    p = sub.add_parser("dynamics", help="P_-x(t) versus scaled time")
    _common(p)
    p.add_argument("--t-max", type=float, default=10.0, help="in units of 2 pi / delta")
    p.add_argument("--steps", type=int, default=2000, help="number of time points")
    p.add_argument("--amp", type=float, default=0.0, help="seed coherent amplitude")
    p.add_argument(
        "--pin-beta",
        default="gsrwa",
        help="method whose beta displaces the initial state for all traces, or 'own'",
    )
    p.add_argument("--n-terms", type=int, default=40)

    p = sub.add_parser("variance", help="ground-state quadrature variances")
    _common(p)

    p = sub.add_parser("residuals", help="elimination-condition residuals per block")
    _common(p)

    p = sub.add_parser("convergence", help="oracle levels versus cutoff")
    _common(p)
    p.add_argument("--ladder", type=int, default=3, help="how many cutoffs, 50 apart")
    parser.subcommands = sub.choices
    return parser


def parse_config(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        values = read_config_file(args.config)
        subparser = parser.subcommands[args.command]
        known = {a.dest: a for a in subparser._actions}
        defaults = {}
        for key, value in values.items():
            if key not in known or key in ("config", "help"):
                raise ConfigError(f"unknown config key {key!r}")
            action = known[key]
            try:
                defaults[key] = action.type(value) if action.type else value
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {value!r}") from exc
        subparser.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def g_grid(args) -> np.ndarray:
    if args.g_range is not None:
        try:
            start, stop, count = args.g_range.split(":")
            start, stop, count = float(start), float(stop), int(count)
        except ValueError as exc:
            raise ConfigError("--g-range must be START:STOP:COUNT") from exc
        if count < 2 or not stop > start:
            raise ConfigError("--g-range must be strictly increasing with COUNT >= 2")
        return np.linspace(start, stop, count)
    return np.array([0.0 if args.g is None else args.g])


def check_config(args) -> list[str]:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    if not methods:
        raise ConfigError("methods must be non-empty")
    bad = [m for m in methods if m not in ALL_METHODS]
    if bad:
        raise ConfigError(f"unknown methods {bad}; choose from {ALL_METHODS}")
    if args.omega <= 0:
        raise ConfigError("omega must be positive")
    if args.tau < 0:
        raise ConfigError("tau must be non-negative")
    if args.n_levels < 1:
        raise ConfigError("n-levels must be >= 1")
    if "grwa" in methods and args.tau != 1.0:
        raise ConfigError("grwa is only defined for tau = 1")
    if args.command == "residuals" and "exact" in methods:
        raise ConfigError("exact has no elimination residuals")
    if args.command == "dynamics":
        if args.steps < 2:
            raise ConfigError("steps must be >= 2")
        if args.delta == 0:
            raise ConfigError("dynamics time axis is scaled by delta; delta must be nonzero")
        if args.pin_beta not in ANALYTIC + ("own",):
            raise ConfigError("--pin-beta must be an analytic method or 'own'")
    if np.any(g_grid(args) < 0):
        raise ConfigError("g must be non-negative")
    return methods


# --- commands ----------------------------------------------------------------

def _params(args, g) -> ModelParams:
    return ModelParams(args.delta, args.omega, float(g), args.tau)


def _spectrum_point(task):
    args, g, methods = task
    params = _params(args, g)
    rows = []
    for method in methods:
        if method == "exact":
            spec = exact.solve_exact(params, args.n_max, levels=args.n_levels)
            for i in range(args.n_levels):
                rows.append((g / args.omega, method, i, spec.energies[i] / args.omega,
                             int(i < spec.converged_count)))
        else:
            vp = gsrwa.variational_params(params, method)
            energies = gsrwa.lowest_energies(params, vp, args.n_levels)
            for i, e in enumerate(energies):
                rows.append((g / args.omega, method, i, e / args.omega, ""))
    return rows


def _variance_point(task):
    args, g, methods = task
    params = _params(args, g)
    rows = []
    for method in methods:
        if method == "exact":
            spec = exact.solve_exact(params, args.n_max, levels=1)
            dp, dx = exact_ground_variances(params, spec)
        else:
            vp = gsrwa.variational_params(params, method)
            dp = gsrwa.momentum_variance(params, vp)
            dx = gsrwa.position_variance(params, vp)
        rows.append((g, args.delta / args.omega, method, dp, dx, dp * dx))
    return rows


def exact_ground_variances(params: ModelParams, spec: exact.ExactSpectrum):
    """Momentum and position variances of the oracle ground state."""
    tr = FockTruncation(spec.n_max_used)
    psi = spec.vectors[:, 0].reshape(2, tr.size)
    a = np.diag(np.sqrt(np.arange(1, tr.size, dtype=float)), 1)
    w = params.omega
    # real eigenvector and parity symmetry make <p> = <x> = 0
    minus, plus = a.T - a, a.T + a
    dp = -w / 2 * sum(v @ minus @ minus @ v for v in psi)
    dx = sum(v @ plus @ plus @ v for v in psi) / (2 * w)
    return float(dp), float(dx)


def _residual_point(task):
    args, g, methods = task
    params = _params(args, g)
    rows = []
    for method in methods:
        for n in range(args.n_levels):
            if method == "gsrwa-full":
                vp = gsrwa.solve_variational_full(params, n)
            else:
                vp = gsrwa.variational_params(params, method)
            crw, two = gsrwa.elimination_residuals(params, vp, n)
            rows.append((g, method, n, crw, two))
    return rows


def _map(func, tasks, jobs):
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(func, tasks))
    return [func(t) for t in tasks]


def cmd_spectrum(args, methods):
    tasks = [(args, g, methods) for g in g_grid(args)]
    return [row for rows in _map(_spectrum_point, tasks, args.jobs) for row in rows]


def cmd_variance(args, methods):
    tasks = [(args, g, methods) for g in g_grid(args)]
    return [row for rows in _map(_variance_point, tasks, args.jobs) for row in rows]


def cmd_residuals(args, methods):
    tasks = [(args, g, methods) for g in g_grid(args)]
    return [row for rows in _map(_residual_point, tasks, args.jobs) for row in rows]


def cmd_dynamics(args, methods):
    grid = g_grid(args)
    if len(grid) != 1:
        raise ConfigError("dynamics takes a single --g")
    params = _params(args, grid[0])
    t_scaled = np.linspace(0.0, args.t_max, args.steps)
    times = t_scaled * 2 * math.pi / args.delta
    pinned = None
    if args.pin_beta != "own":
        pinned = gsrwa.variational_params(params, args.pin_beta).beta
    rows = []
    for method in methods:
        if method == "exact":
            beta0 = pinned if pinned is not None else 0.0
            spec = dynamics.InitialStateSpec(args.amp, beta0)
            trunc = FockTruncation(args.n_max) if args.n_max else None
            series = dynamics.population_exact(params, spec, times, trunc)
        else:
            vp = gsrwa.variational_params(params, method)
            beta0 = pinned if pinned is not None else vp.beta
            spec = dynamics.InitialStateSpec(args.amp, beta0)
            series = dynamics.population_analytic(params, vp, spec, times, args.n_terms)
        rows.extend((t, method, p) for t, p in zip(t_scaled, series.values))
    return rows


def cmd_convergence(args, methods):
    grid = g_grid(args)
    if len(grid) != 1:
        raise ConfigError("convergence takes a single --g")
    params = _params(args, grid[0])
    start = args.n_max or exact.default_n_max(params)
    rows = []
    for step in range(args.ladder):
        n_max = start + exact.CONVERGENCE_STEP * step
        energies = np.linalg.eigvalsh(exact.build_hamiltonian(params, FockTruncation(n_max)))
        rows.extend((n_max, i, energies[i]) for i in range(args.n_levels))
    return rows


COMMANDS = {
    "spectrum": cmd_spectrum,
    "dynamics": cmd_dynamics,
    "variance": cmd_variance,
    "residuals": cmd_residuals,
    "convergence": cmd_convergence,
}


def render(args, rows) -> str:
    buf = io.StringIO()
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "jobs")}
    buf.write(f"# squeezed-rabi {__version__}\n")
    buf.write(f"# config {json.dumps(config, sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADERS[args.command])
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def main(argv=None) -> int:
    try:
        args = parse_config(argv)
        methods = check_config(args)
        rows = COMMANDS[args.command](args, methods)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # parameter validation inside the library
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = render(args, rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
