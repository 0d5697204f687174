"""Command-line front end.

Subcommands
-----------
green     pair Green elements on an energy grid (CSV)
pump      pumped singlets for one cycle (JSON)
fig2b     footprint sweep over (U_min, U_max) (CSV)
fig3      energy sweep for several impurity separations (CSV)
oracle    quadrature vs finite-lattice comparison table (CSV)
validate  acceptance suite (text lines + JSON report)

Exit codes: 0 success, 1 acceptance failure or failed computation, 2 usage or
configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings

import numpy as np

from . import __version__
from .acceptance import run_all
from .config import DEFAULTS, Settings, load_config, parse_grid, parse_vertices
from .errors import ConfigError, PairPumpError, ResonanceError
from .lattice_green import ComplexEnergy, LatticeModel, g0_forced_branch, g0_offdiag, g0_onsite
from .oracle import FiniteLattice, TwoParticleBasis, default_oracle_eta, oracle_t_matrix, resolvent_elements
from .impurity import t_matrix
from .pump import (AdiabaticityWarning, PairDistribution, PumpCycle, adiabaticity_check, energy_sweep,
                   footprint_sweep, pumped_singlets)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

GREEN_COLUMNS = ["E", "eta", "re_g0_onsite", "im_g0_onsite", "re_g0_offdiag", "im_g0_offdiag",
                 "re_g0_plus", "im_g0_plus", "re_g0_minus", "im_g0_minus"]
FIG2B_COLUMNS = ["u_min", "u_max", "q_singlets"]
FIG3_COLUMNS = ["e_max", "m", "q_singlets"]
ORACLE_COLUMNS = ["element", "E", "m", "eta", "n_sites", "re_quadrature", "im_quadrature", "re_oracle",
                  "im_oracle", "rel_err"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value configuration file")
    common.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("--with-oracle", action="store_true", help="add finite-lattice comparison (green)")
    common.add_argument("--mode", choices=("finite_T", "zero_T"))
    common.add_argument("--sign-pairing", choices=("printed", "alternate"))
    common.add_argument("--evanescent-branch", choices=("keep", "drop"))
    common.add_argument("--eta", type=float)
    common.add_argument("--beta", type=float)
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any configuration key (repeatable)")
    parser = _Parser(prog="pairpump", description="Adiabatic pumping of singlet pairs through two Hubbard "
                     "impurities on a tight-binding chain.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, text in [("green", "pair Green elements on an energy grid (CSV)"),
                       ("pump", "pumped singlets for one cycle (JSON)"),
                       ("fig2b", "footprint sweep over (U_min, U_max) (CSV)"),
                       ("fig3", "energy sweep for the configured impurity indices (CSV)"),
                       ("oracle", "quadrature vs finite-lattice comparison table (CSV)"),
                       ("validate", "run the acceptance suite")]:
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


def _config_from_args(args):
    overrides = {"mode": args.mode, "sign_pairing": args.sign_pairing,
                 "evanescent_branch": args.evanescent_branch, "eta": args.eta, "beta": args.beta}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key = key.strip()
        if key in overrides and overrides[key] is not None:
            continue  # explicit flags win
        overrides[key] = value.strip()
    return load_config(args.config, overrides)


def cycle_from_config(cfg):
    """Explicit polygon if ``vertices`` is set, else the square (u_min, u_max)."""
    if cfg["vertices"]:
        return PumpCycle.polygon(parse_vertices(cfg["vertices"]), cfg["tau"])
    if not cfg["u_min"] <= cfg["u_max"]:
        raise ConfigError("u_min must not exceed u_max")
    return PumpCycle.square(cfg["u_min"], cfg["u_max"], cfg["tau"])


def _fmt(x):
    return repr(float(x))


def _write_csv(columns, rows, out):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([r[c] if isinstance(r[c], str) else _fmt(r[c]) for c in columns])
    _emit(buf.getvalue(), out)


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ----------------------------------------------------------------------------
def cmd_green(cfg, out, with_oracle=False):
    """Pair Green elements on the ``energies`` grid; failed rows carry a message in ``err``."""
    settings = Settings.from_config(cfg)
    m = cfg["m"]
    grid = parse_grid(cfg["energies"])
    columns = GREEN_COLUMNS + (["oracle_rel_err"] if with_oracle else []) + ["err"]
    if with_oracle:
        lat = FiniteLattice(cfg["oracle_n"], cfg["oracle_boundary"])
        lat.require_room(m)
        basis = TwoParticleBasis(lat, "symmetric")
        eta_o = max(settings.eta, default_oracle_eta(lat.n_sites))
    rows = []
    for E in grid:
        ce = ComplexEnergy(float(E), settings.eta)
        row = dict.fromkeys(columns, float("nan"))
        row.update(E=float(E), eta=settings.eta, err="")
        try:
            vals = {"g0_onsite": g0_onsite(ce, settings), "g0_offdiag": g0_offdiag(m, ce, settings),
                    "g0_plus": g0_forced_branch(m, ce, "+", settings),
                    "g0_minus": g0_forced_branch(m, ce, "-", settings)}
            for k, v in vals.items():
                row["re_" + k], row["im_" + k] = v.real, v.imag
            if with_oracle:
                co = ComplexEnergy(float(E), eta_o)
                so = settings.replace(eta=eta_o)
                fin = resolvent_elements(lat, basis, None, co, [(-m, -m), (m, m)], (-m, -m))
                quad = (g0_onsite(co, so), g0_offdiag(m, co, so))
                row["oracle_rel_err"] = max(abs(f - q) / abs(q) for f, q in zip(fin, quad))
        except PairPumpError as exc:
            row["err"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    _write_csv(columns, rows, out)
    return EXIT_OK


def cmd_pump(cfg, out):
    """Pumped singlets per cycle as a JSON record."""
    settings = Settings.from_config(cfg)
    cycle = cycle_from_config(cfg)
    model = LatticeModel(cfg["m"])
    dist = PairDistribution(cfg["e_max"], cfg["beta"], cfg["mode"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AdiabaticityWarning)
        report = adiabaticity_check(cycle.tau, model, dist)
    record = {"cycle": cycle.as_dict(), "m": model.m, "e_max": dist.e_max, "beta": dist.beta,
              "eta": settings.eta, "sign_pairing": settings.sign_pairing,
              "evanescent_branch": settings.evanescent_branch, "adiabaticity": report}
    try:
        res = pumped_singlets(cycle, model, dist, settings)
    except ResonanceError as exc:
        record.update(q_singlets=None, error_estimate=None, mode=dist.mode, error=str(exc),
                      pole_location=exc.location)
        _emit(json.dumps(record, indent=2, default=float) + "\n", out)
        print(f"error: {exc} at {exc.location}", file=sys.stderr)
        return EXIT_FAIL
    record.update(q_singlets=res.q_singlets, error_estimate=res.error_estimate, mode=res.mode,
                  diagnostics=res.diagnostics)
    ordered = {k: record[k] for k in ("q_singlets", "error_estimate", "mode", "cycle", "adiabaticity")}
    ordered.update({k: v for k, v in record.items() if k not in ordered})
    _emit(json.dumps(ordered, indent=2, default=float) + "\n", out)
    return EXIT_OK


def _sweep_rows(rows, columns, out):
    for r in rows:
        if r["error"]:
            print(f"warning: cell {[r[c] for c in columns[:2]]} failed: {r['error']}", file=sys.stderr)
    _write_csv(columns + ["error_estimate", "err"], [{**r, "err": r["error"]} for r in rows], out)


def cmd_fig2b(cfg, out):
    """Footprint sweep at ``fig2b_e_max``."""
    settings = Settings.from_config(cfg)
    grid = parse_grid(cfg["fig2b_u_grid"])
    dist = PairDistribution(cfg["fig2b_e_max"], cfg["beta"], cfg["mode"])
    rows = footprint_sweep(grid, grid, LatticeModel(cfg["m"]), dist, settings, cfg["workers"])
    _sweep_rows(rows, FIG2B_COLUMNS, out)
    return EXIT_OK


def cmd_fig3(cfg, out):
    """Energy sweep of the reference cycle for every index in ``fig3_m``."""
    settings = Settings.from_config(cfg)
    grid = parse_grid(cfg["fig3_e_grid"])
    try:
        ms = [int(x) for x in str(cfg["fig3_m"]).split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse fig3_m {cfg['fig3_m']!r}") from None
    if not ms or min(ms) < 1:
        raise ConfigError("fig3_m needs at least one index >= 1")
    rows = energy_sweep(grid, ms, cycle_from_config(cfg), settings, cfg["beta"], cfg["mode"], cfg["workers"])
    for r in rows:
        r["m"] = str(r["m"])
    _sweep_rows(rows, FIG3_COLUMNS, out)
    return EXIT_OK


def cmd_oracle(cfg, out):
    """Quadrature vs finite-lattice inversion on the ``energies`` grid, plus the T-matrix."""
    settings = Settings.from_config(cfg)
    m = cfg["m"]
    lat = FiniteLattice(cfg["oracle_n"], cfg["oracle_boundary"])
    lat.require_room(m)
    basis = TwoParticleBasis(lat, "symmetric")
    eta = max(settings.eta, default_oracle_eta(lat.n_sites))
    s = settings.replace(eta=eta)
    rows = []

    def add(element, E, mm, n, q, o):
        rows.append({"element": element, "E": E, "m": str(mm), "eta": eta, "n_sites": str(n), "re_quadrature": q.real,
                     "im_quadrature": q.imag, "re_oracle": o.real, "im_oracle": o.imag,
                     "rel_err": abs(q - o) / abs(o)})

    for E in parse_grid(cfg["energies"]):
        ce = ComplexEnergy(float(E), eta)
        fin = resolvent_elements(lat, basis, None, ce, [(-m, -m), (m, m)], (-m, -m))
        add("g0_onsite", float(E), 0, lat.n_sites, g0_onsite(ce, s), fin[0])
        add("g0_offdiag", float(E), m, lat.n_sites, g0_offdiag(m, ce, s), fin[1])
    lat_t = FiniteLattice(cfg["oracle_t_n"], cfg["oracle_boundary"])
    eta_t = max(settings.eta, default_oracle_eta(lat_t.n_sites))
    t_or, _ = oracle_t_matrix(cfg["oracle_u"], ComplexEnergy(0.0, eta_t), lat_t)
    add("t_matrix", 0.0, 0, lat_t.n_sites, t_matrix(cfg["oracle_u"], 0.0, settings.replace(eta=eta_t)), t_or)
    _write_csv(ORACLE_COLUMNS, rows, out)
    return EXIT_OK


def cmd_validate(cfg, out):
    """Run the acceptance criteria listed in ``criteria``; exit 1 if any fails."""
    try:
        numbers = [int(x) for x in str(cfg["criteria"]).split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse criteria {cfg['criteria']!r}") from None
    from .acceptance import CRITERIA
    if not numbers or any(n not in CRITERIA for n in numbers):
        raise ConfigError(f"criteria must be a list drawn from {sorted(CRITERIA)}")
    settings = Settings.from_config(cfg)
    results = run_all(numbers, cfg, settings, echo=lambda line: print(line, file=sys.stderr, flush=True))
    report = {"passed": all(r.passed for r in results),
              "settings": {k: cfg[k] for k in ("sign_pairing", "evanescent_branch", "eta", "mode", "beta")},
              "criteria": [r.as_dict() for r in results]}
    _emit(json.dumps(report, indent=2, default=str) + "\n", out)
    return EXIT_OK if report["passed"] else EXIT_FAIL


COMMANDS = {"green": cmd_green, "pump": cmd_pump, "fig2b": cmd_fig2b, "fig3": cmd_fig3, "oracle": cmd_oracle,
            "validate": cmd_validate}


def main(argv=None):
    """Entry point; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"pairpump: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = _config_from_args(args)
        if args.command == "green":
            return cmd_green(cfg, args.out, args.with_oracle)
        return COMMANDS[args.command](cfg, args.out)
    except ConfigError as exc:
        print(f"pairpump: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"pairpump: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PairPumpError as exc:
        print(f"pairpump: computation failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
