"""
Command-line front end.

Single results are printed as JSON, sweeps as CSV with one header line.
Exit codes: 0 ok, 2 bad spec or arguments, 3 invalid Hamiltonian,
4 symmetry certificate refused.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .errors import SpecFormatError, SymmetryCertificateError, ThermoSepError
from .hamiltonians import (
    FrequencySpectrum,
    PotentialMatrix,
    RingParams,
    is_shift_invariant,
    load_spec,
    ring_dispersion,
    ring_potential,
    spectrum_of,
)
from .measures import eof_lower_bound, p_measure
from .septemp import check_full_separability, critical_beta, sigma
from .thermal import ThermalPoint, normal_mode_cm, thermal_cm

EXIT_OK = 0
EXIT_SPEC = 2
EXIT_HAMILTONIAN = 3
EXIT_SYMMETRY = 4

#: Nearest-neighbour entanglement line k_B T / (hbar omega) for the untrapped ring.
KT_NEAREST_NEIGHBOUR = 0.5
#: Two-block entanglement line quoted for omega = sqrt(20) delta; annotation only.
KT_BLOCKS = 2.8 / math.sqrt(20.0)


class UsageError(SpecFormatError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    min: float
    max: float
    points: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.variable not in ("beta", "temperature", "delta_over_omega", "r"):
            raise UsageError(f"unknown sweep variable {self.variable!r}")
        if not (math.isfinite(self.min) and math.isfinite(self.max) and self.min < self.max):
            raise UsageError(f"sweep range needs min < max, got [{self.min}, {self.max}]")
        if self.points < 2:
            raise UsageError("a sweep needs at least 2 points")
        if self.spacing not in ("linear", "log"):
            raise UsageError(f"unknown spacing {self.spacing!r}")
        if self.spacing == "log" and self.min <= 0:
            raise UsageError("log spacing needs a positive range")

    def grid(self):
        if self.spacing == "log":
            g = np.geomspace(self.min, self.max, self.points)
        else:
            g = np.linspace(self.min, self.max, self.points)
        # pin the endpoints exactly
        g[0], g[-1] = self.min, self.max
        return [float(x) for x in g]


# -- formatting ----------------------------------------------------------------------


def fmt(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.12g}"
    if x is None:
        return ""
    return str(x)


def _json_value(x):
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return fmt(x)
        return float(fmt(x))
    if isinstance(x, dict):
        return {k: _json_value(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_value(v) for v in x]
    return str(x)


def emit_json(record, out, timestamp=False):
    record = dict(record)
    record["version"] = __version__
    if timestamp:
        record["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    out.write(json.dumps(_json_value(record), sort_keys=True, indent=2, ensure_ascii=False) + "\n")


def emit_csv(columns, rows, echo, out, timestamp=False):
    """Write rows under a one-line header; every row carries the version and input echo."""
    writer = csv.writer(out, lineterminator="\n")
    extra = ["version", "input"] + (["timestamp"] if timestamp else [])
    writer.writerow(list(columns) + extra)
    echo_text = json.dumps(_json_value(echo), sort_keys=True, separators=(",", ":"))
    stamp = [datetime.datetime.now(datetime.timezone.utc).isoformat()] if timestamp else []
    for row in rows:
        writer.writerow([fmt(row[c]) for c in columns] + [__version__, echo_text] + stamp)


def parallel_map(fn, items, jobs):
    """Order-preserving map over independent sweep points."""
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# -- shared helpers --------------------------------------------------------------------


def _load(path):
    system = load_spec(path)
    with open(path, encoding="utf-8") as fh:
        return system, json.load(fh)


def _certify(system):
    """Refuse exactness unless the system is a cyclically symmetric kinetic+potential Hamiltonian."""
    if isinstance(system, RingParams):
        return
    if isinstance(system, PotentialMatrix):
        if is_shift_invariant(system):
            return
        raise SymmetryCertificateError("potential matrix is not invariant under the cyclic site shift")
    raise SymmetryCertificateError("a bare spectrum carries no site structure to certify")


def _thermal_point(args, beta):
    return ThermalPoint(beta, args.hbar, args.kB)


def _echo(args, raw_spec=None, **extra):
    echo = {"command": args.command, "hbar": args.hbar, "kB": args.kB}
    if raw_spec is not None:
        echo["spec"] = raw_spec
    echo.update(extra)
    return echo


# -- subcommands -------------------------------------------------------------------------


def cmd_spectrum(args, out):
    system, raw = _load(args.spec)
    sp = spectrum_of(system)
    rows = [
        {"j": j, "omega": w, "omega_min": sp.omega_min, "omega_max": sp.omega_max, "r": sp.ratio}
        for j, w in enumerate(sp.frequencies)
    ]
    emit_csv(["j", "omega", "omega_min", "omega_max", "r"], rows, _echo(args, raw), out, args.timestamp)


def cmd_tcrit(args, out):
    system, raw = _load(args.spec)
    if args.exact_symmetric:
        _certify(system)
    sp = spectrum_of(system)
    res = critical_beta(sp, args.exact_symmetric, args.hbar)
    record = {
        "beta_crit": res.beta_crit,
        "T_crit": res.temperature(args.kB),
        "sigma_r": res.sigma_r,
        "t_star": res.t_star,
        "omega0_star": res.omega0_star,
        "exact": res.exact,
        "method": res.method.value,
        "omega_min": sp.omega_min,
        "omega_max": sp.omega_max,
        "r": sp.ratio,
        "separable_at_all_T": math.isinf(res.beta_crit),
        "input": _echo(args, raw, exact_symmetric=args.exact_symmetric),
    }
    emit_json(record, out, args.timestamp)


def _phase_row(r):
    s = sigma(r)
    return {"inv_r": 1.0 / r, "r": r, "sigma_r": s, "t_over_boundary": 1.0 / s}


def cmd_phase_diagram(args, out):
    if not (1.0 < args.r_min < args.r_max):
        raise UsageError("phase diagram needs 1 < r_min < r_max")
    sweep = SweepSpec("r", args.r_min, args.r_max, args.points, args.spacing)
    rows = parallel_map(_phase_row, sweep.grid(), args.jobs)
    rows.sort(key=lambda row: row["inv_r"])
    echo = _echo(args, None, r_min=args.r_min, r_max=args.r_max, points=args.points, spacing=args.spacing)
    emit_csv(["inv_r", "r", "sigma_r", "t_over_boundary"], rows, echo, out, args.timestamp)


def ring_extremes(delta_over_omega, n=None):
    """``(w_min, w_max)`` of the ring in units of omega; ``n=None`` is the large-ring limit."""
    d = delta_over_omega
    if n is None:
        return d, 2.0 * math.sqrt(1.0 + (0.5 * d) ** 2)
    sp = ring_dispersion(RingParams(n, 1.0, d))
    return sp.omega_min, sp.omega_max


def ring_row(delta_over_omega, n=None):
    w_min, w_max = ring_extremes(delta_over_omega, n)
    r = w_max / w_min
    s = sigma(r)
    return {
        "delta_over_omega": delta_over_omega,
        "r": r,
        "sigma_r": s,
        "kT_crit_over_homega": w_max / s,
        "kT_nn_over_homega": KT_NEAREST_NEIGHBOUR,
        "kT_blocks_over_homega": KT_BLOCKS,
    }


def cmd_ring(args, out):
    if args.n is not None and args.n < 1:
        raise UsageError("--n must be a positive integer")
    if not args.dmin > 0:
        raise UsageError("delta/omega range must be positive")
    sweep = SweepSpec("delta_over_omega", args.dmin, args.dmax, args.points, args.spacing)
    rows = parallel_map(lambda d: ring_row(d, args.n), sweep.grid(), args.jobs)
    rows.sort(key=lambda row: row["delta_over_omega"])
    columns = [
        "delta_over_omega",
        "r",
        "sigma_r",
        "kT_crit_over_homega",
        "kT_nn_over_homega",
        "kT_blocks_over_homega",
    ]
    echo = _echo(
        args, None, delta_over_omega_min=args.dmin, delta_over_omega_max=args.dmax,
        points=args.points, spacing=args.spacing, n=args.n,
    )
    emit_csv(columns, rows, echo, out, args.timestamp)


def cmd_pmeasure(args, out):
    system, raw = _load(args.spec)
    sp = spectrum_of(system)
    scale = 1.0
    if args.relative:
        scale = critical_beta(sp, False, args.hbar).beta_crit
        if math.isinf(scale):
            raise UsageError("--relative needs a finite critical beta")
    if args.beta is not None:
        if args.sweep is not None:
            raise UsageError("give either --beta or --sweep, not both")
        variable, betas = "beta", [args.beta * scale]
    else:
        if args.sweep is None:
            raise UsageError("one of --beta or --sweep is required")
        sweep = SweepSpec(args.sweep, args.min, args.max, args.points, args.spacing)
        variable = args.sweep
        if variable == "beta":
            betas = [b * scale for b in sweep.grid()]
        else:
            if args.relative:
                raise UsageError("--relative applies to beta sweeps only")
            betas = [1.0 / (args.kB * temp) for temp in sweep.grid()]
    for b in betas:
        if not (b > 0 and math.isfinite(b)):
            raise UsageError("inverse temperatures must be positive and finite")

    def row(beta):
        res = p_measure(sp, _thermal_point(args, beta))
        return {
            "beta": beta,
            "temperature": 1.0 / (args.kB * beta),
            "p": res.p,
            "neg_log_p": res.neg_log_p,
            "omega0_star": res.omega0_star,
            "eof_lower_bound": eof_lower_bound(res),
            "underflow": res.underflow,
        }

    rows = parallel_map(row, betas, args.jobs)
    rows.sort(key=lambda r: r[variable])
    columns = ["beta", "temperature", "p", "neg_log_p", "omega0_star", "eof_lower_bound", "underflow"]
    if variable == "temperature":
        columns = ["temperature", "beta"] + columns[2:]
    echo = _echo(
        args, raw, beta=args.beta, sweep=args.sweep, min=args.min, max=args.max,
        points=args.points, spacing=args.spacing, relative=args.relative,
    )
    emit_csv(columns, rows, echo, out, args.timestamp)


def cmd_check_sep(args, out):
    system, raw = _load(args.spec)
    if args.exact_symmetric:
        _certify(system)
    sp = spectrum_of(system)
    if (args.beta is None) == (args.beta_over_crit is None):
        raise UsageError("give exactly one of --beta or --beta-over-crit")
    if args.beta is not None:
        beta = args.beta
    else:
        bc = critical_beta(sp, False, args.hbar).beta_crit
        if math.isinf(bc):
            raise UsageError("--beta-over-crit needs a finite critical beta")
        beta = args.beta_over_crit * bc
    t = _thermal_point(args, beta)
    if isinstance(system, FrequencySpectrum):
        # decoupled oscillators with these frequencies
        gamma, mass, basis = normal_mode_cm(sp, t), 1.0, "normal_modes"
    else:
        pot = ring_potential(system) if isinstance(system, RingParams) else system
        gamma, mass, basis = thermal_cm(pot, t), pot.mass, "sites"
    verdict = check_full_separability(gamma, sp, t, args.exact_symmetric, mass)
    record = {
        "status": verdict.status.value,
        "witness_omega0": verdict.witness_omega0,
        "mode_witnesses": list(verdict.mode_witnesses),
        "margin": verdict.margin,
        "beta": beta,
        "beta_crit": critical_beta(sp, args.exact_symmetric, args.hbar).beta_crit,
        "exact": bool(args.exact_symmetric),
        "basis": basis,
        "input": _echo(args, raw, beta=args.beta, beta_over_crit=args.beta_over_crit,
                       exact_symmetric=args.exact_symmetric),
    }
    emit_json(record, out, args.timestamp)


# -- parser ----------------------------------------------------------------------------------


def _default_jobs():
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--hbar", type=float, default=1.0, help="reduced Planck constant (default 1)")
    common.add_argument("--kB", type=float, default=1.0, help="Boltzmann constant (default 1)")
    common.add_argument("--jobs", type=int, default=_default_jobs(), help="sweep workers")
    common.add_argument("--timestamp", action="store_true", help="add a UTC timestamp to the output")

    parser = argparse.ArgumentParser(
        prog="thermosep",
        description="Separability and entanglement of thermal states of coupled harmonic oscillators.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", parents=[common], help="normal-mode spectrum as CSV")
    p.add_argument("spec")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("tcrit", parents=[common], help="critical temperature as JSON")
    p.add_argument("spec")
    p.add_argument("--exact-symmetric", action="store_true", help="certify exactness (shift-invariant V only)")
    p.set_defaults(func=cmd_tcrit)

    p = sub.add_parser("phase-diagram", parents=[common], help="universal boundary 1/sigma(r) vs 1/r")
    p.add_argument("--r-min", type=float, required=True)
    p.add_argument("--r-max", type=float, required=True)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--spacing", choices=["linear", "log"], default="log")
    p.set_defaults(func=cmd_phase_diagram)

    p = sub.add_parser("ring", parents=[common], help="ring critical temperature vs delta/omega")
    p.add_argument("--delta-over-omega-min", dest="dmin", type=float, required=True)
    p.add_argument("--delta-over-omega-max", dest="dmax", type=float, required=True)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--spacing", choices=["linear", "log"], default="log")
    p.add_argument("--n", type=int, default=None, help="ring size (default: large-ring limit)")
    p.set_defaults(func=cmd_ring)

    p = sub.add_parser("pmeasure", parents=[common], help="P-measure at one beta or over a sweep")
    p.add_argument("spec")
    p.add_argument("--beta", type=float)
    p.add_argument("--sweep", choices=["beta", "temperature"])
    p.add_argument("--min", type=float)
    p.add_argument("--max", type=float)
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--spacing", choices=["linear", "log"], default="linear")
    p.add_argument("--relative", action="store_true", help="beta values are multiples of beta_crit")
    p.set_defaults(func=cmd_pmeasure)

    p = sub.add_parser("check-sep", parents=[common], help="separability verdict as JSON")
    p.add_argument("spec")
    p.add_argument("--beta", type=float)
    p.add_argument("--beta-over-crit", type=float)
    p.add_argument("--exact-symmetric", action="store_true")
    p.set_defaults(func=cmd_check_sep)
    return parser


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    try:
        args.func(args, out)
    except SpecFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except SymmetryCertificateError as exc:
        print(f"error: certificate refused: {exc}", file=sys.stderr)
        return EXIT_SYMMETRY
    except ThermoSepError as exc:
        print(f"error: invalid Hamiltonian: {exc}", file=sys.stderr)
        return EXIT_HAMILTONIAN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
