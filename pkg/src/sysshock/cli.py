"""Command-line interface: ``sysshock {tau,simulate,calibrate}``.

Global options (--seed, --out, --precision, --config, --workers) go after the
subcommand.  A config file is a flat JSON object whose keys are option names;
command-line flags override it, and it overrides built-in defaults.

Exit codes: 0 success, 2 invalid input, 3 unusable data, 4 numerical failure.
Entities are numbered from 1 in all output.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .archimedean import Family
from .calibration import CalibrationOptions, calibrate, riskiness_report
from .dependence import kendall_fn_lifetimes, default_grid, tau_lifetimes, tau_systemic
from .market_data import (
    DEFAULT_LGD,
    DEFAULT_RATE,
    MIN_ROWS_PER_YEAR,
    DataError,
    extract_intensities,
    load_spreads,
    yearly_empirical_taus,
)
from .montecarlo import (
    SimulationConfig,
    empirical_simultaneous,
    empirical_tau,
    sample_model,
    tau_standard_error,
)
from .shock_model import ModelParams, simultaneous_default_prob

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4
DEFAULT_SEED = 0

DEFAULTS = {
    "seed": DEFAULT_SEED,
    "out": ".",
    "precision": 6,
    "workers": 1,
    "verbose": False,
    # tau / simulate
    "family": "clayton",
    "alpha": None,
    "theta": None,
    "beta": None,
    "grid": 1000,
    "method": "auto",
    "n": 100_000,
    "t": 0.0,
    "save_samples": False,
    # calibrate
    "spreads": None,
    "year": None,
    "lgd": DEFAULT_LGD,
    "rate": DEFAULT_RATE,
    "restarts": 20,
    "max_iters": 5000,
    "tolerance": 1e-12,
    "tau_on": "levels",
}

log = logging.getLogger("sysshock")


class UsageError(Exception):
    pass


def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _common(p):
    S = argparse.SUPPRESS
    p.add_argument("--seed", type=int, default=S, help=f"RNG seed (default {DEFAULT_SEED})")
    p.add_argument("--out", default=S, help="output directory (default .)")
    p.add_argument("--precision", type=int, default=S, help="significant digits in CSV output (default 6)")
    p.add_argument("--config", default=S, help="flat JSON file supplying any option")
    p.add_argument("--workers", type=int, default=S, help="parallel workers (default 1)")
    p.add_argument("-v", "--verbose", action="store_true", default=S)


def _model_flags(p):
    S = argparse.SUPPRESS
    p.add_argument("--family", choices=[f.name.lower() for f in Family], default=S)
    p.add_argument("--alpha", type=_floats, default=S, help="alpha_1,...,alpha_d")
    p.add_argument("--theta", type=_floats, default=S, help="theta_0,theta_1,...,theta_d")
    p.add_argument("--beta", type=_floats, default=S, help="beta_1,...,beta_d")


def build_parser():
    S = argparse.SUPPRESS
    parser = argparse.ArgumentParser(prog="sysshock", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tau", help="pairwise and systemic Kendall's taus")
    _model_flags(p)
    p.add_argument("--grid", type=int, default=S, help="Kendall-function grid points (default 1000)")
    p.add_argument("--method", choices=["auto", "closed", "generic"], default=S)
    _common(p)

    p = sub.add_parser("simulate", help="Monte Carlo check of the closed forms")
    _model_flags(p)
    p.add_argument("--n", type=int, default=S, help="number of samples (>= 1000, default 100000)")
    p.add_argument("--t", type=float, default=S, help="horizon for the simultaneous default (default 0)")
    p.add_argument("--save-samples", action="store_true", default=S, help="also write lifetimes.csv")
    _common(p)

    p = sub.add_parser("calibrate", help="fit the model to CDS-implied taus, year by year")
    p.add_argument("--spreads", default=S, help="CSV file: date,<entity1>,...")
    p.add_argument("--year", type=int, default=S, help="calendar year (default: every year with enough data)")
    p.add_argument("--family", choices=["clayton", "gumbel"], default=S)
    p.add_argument("--lgd", type=float, default=S, help=f"loss given default (default {DEFAULT_LGD})")
    p.add_argument("--rate", type=float, default=S, help="flat interest rate, metadata only (default 0)")
    p.add_argument("--restarts", type=int, default=S)
    p.add_argument("--max-iters", type=int, default=S)
    p.add_argument("--tolerance", type=float, default=S)
    p.add_argument("--tau-on", choices=["levels", "diffs"], default=S)
    _common(p)
    return parser


def _load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path}: invalid JSON ({exc.msg}, line {exc.lineno})") from None
    if not isinstance(cfg, dict):
        raise UsageError(f"config {path}: expected a JSON object")
    out = {}
    for key, value in cfg.items():
        k = key.replace("-", "_")
        if k not in DEFAULTS or isinstance(value, (dict,)):
            raise UsageError(f"config {path}: unknown option {key!r}")
        out[k] = value
    return out


def resolve_options(argv):
    """Parse flags and merge them over the config file and the defaults."""
    ns = vars(build_parser().parse_args(argv))
    command = ns.pop("command")
    opts = dict(DEFAULTS)
    if "config" in ns:
        opts.update(_load_config(ns.pop("config")))
    opts.update(ns)
    for key in ("alpha", "theta", "beta"):
        if opts[key] is not None:
            try:
                opts[key] = _floats(opts[key])
            except argparse.ArgumentTypeError as exc:
                raise UsageError(str(exc)) from None
    if opts["precision"] < 1 or opts["precision"] > 17:
        raise UsageError("--precision must lie in 1..17")
    if opts["workers"] < 1:
        raise UsageError("--workers must be >= 1")
    if opts["seed"] < 0:
        raise UsageError("--seed must be nonnegative")
    return command, opts


def _params(opts):
    if opts["alpha"] is None or opts["theta"] is None:
        raise UsageError("--alpha and --theta are required")
    family = Family.parse(opts["family"])
    beta = opts["beta"]
    if family is not Family.INDEPENDENCE and beta is None:
        raise UsageError(f"--beta is required for the {family.name.lower()} family")
    return ModelParams.from_family(family, opts["alpha"], opts["theta"], beta)


class _Writer:
    def __init__(self, opts):
        self.dir = Path(opts["out"])
        self.fmt = f"%.{opts['precision']}g"
        self.dir.mkdir(parents=True, exist_ok=True)

    def cell(self, v):
        if isinstance(v, (bool, np.bool_)):
            return "true" if v else "false"
        if isinstance(v, (float, np.floating)):
            return self.fmt % v
        return str(v)

    def write(self, name, header, rows):
        path = self.dir / name
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([self.cell(v) for v in row])
        log.info("wrote %s", path)
        return path


def cmd_tau(opts):
    params = _params(opts)
    out = _Writer(opts)
    grid = default_grid(opts["grid"]) if opts["grid"] > 0 else np.empty(0)
    rows = []
    print(f"{'pair':>8} {'tau':>10} {'tau_MO':>10} {'tau_bar_i':>10} {'tau_bar_k':>10}")
    for i in range(params.d):
        for k in range(i + 1, params.d):
            rep = tau_lifetimes(params, i, k, opts["method"], grid=grid)
            dec = rep.decomposition or {}
            parts = [dec.get(key, float("nan")) for key in ("tau_MO", "tau_bar_i", "tau_bar_k")]
            rows.append([i + 1, k + 1, float(rep.tau), *parts])
            print(f"{i + 1:>3},{k + 1:<4} " + " ".join(f"{v:>10.6f}" for v in [rep.tau, *parts]))
            if grid.size:
                out.write(f"kendall_fn_{i + 1}_{k + 1}.csv", ["t", "K"], zip(grid.tolist(), rep.kendall_fn.tolist()))
    out.write("taus.csv", ["i", "k", "tau", "tau_MO", "tau_bar_i", "tau_bar_k"], rows)
    sys_rows = []
    print(f"{'entity':>8} {'tau_X0_Xj':>10} {'tau_X0_Tj':>10}")
    for j in range(params.d):
        a = float(tau_systemic(params, j, "vs_idiosyncratic", opts["method"]))
        b = float(tau_systemic(params, j, "vs_lifetime", opts["method"]))
        sys_rows.append([j + 1, a, b])
        print(f"{j + 1:>8} {a:>10.6f} {b:>10.6f}")
    out.write("systemic.csv", ["entity", "tau_X0_Xj", "tau_X0_Tj"], sys_rows)
    return EXIT_OK


def cmd_simulate(opts):
    params = _params(opts)
    n = int(opts["n"])
    if n < 1000:
        raise UsageError("--n must be at least 1000")
    t = float(opts["t"])
    if t < 0:
        raise UsageError("--t must be nonnegative")
    out = _Writer(opts)
    cfg = SimulationConfig(n, seed=int(opts["seed"]), n_workers=int(opts["workers"]))
    batch = sample_model(params, cfg)
    rows = []
    se_tau = tau_standard_error(n)
    for i in range(params.d):
        for k in range(i + 1, params.d):
            emp = empirical_tau(batch.T[:, i], batch.T[:, k])
            th = float(tau_lifetimes(params, i, k, grid=np.empty(0)).tau)
            rows.append([f"tau_T{i + 1}_T{k + 1}", emp, th, se_tau, (emp - th) / se_tau])
    for j in range(params.d):
        emp = empirical_tau(batch.X0, batch.T[:, j])
        th = float(tau_systemic(params, j, "vs_lifetime"))
        rows.append([f"tau_X0_T{j + 1}", emp, th, se_tau, (emp - th) / se_tau])
    emp = empirical_simultaneous(batch, t)
    th = float(simultaneous_default_prob(params, t))
    se = float(np.sqrt(max(th * (1 - th), 1e-300) / n))
    rows.append([f"simultaneous_gt_{t:g}", emp, th, se, (emp - th) / se])
    print(f"{'quantity':>22} {'empirical':>10} {'closed':>10} {'se':>10} {'z':>7}")
    for name, e, c, s, z in rows:
        print(f"{name:>22} {e:>10.6f} {c:>10.6f} {s:>10.2e} {z:>7.2f}")
    out.write("simulation_summary.csv", ["quantity", "empirical", "closed_form", "std_error", "z"], rows)
    if opts["save_samples"]:
        out.write("lifetimes.csv", [f"T{j + 1}" for j in range(params.d)], batch.T.tolist())
    return EXIT_OK


def cmd_calibrate(opts):
    if not opts["spreads"]:
        raise UsageError("--spreads is required")
    panel = load_spreads(opts["spreads"])
    print(panel.report.summary(), file=sys.stderr)
    ip = extract_intensities(panel, opts["lgd"], opts["rate"])
    if opts["year"] is not None:
        years = [int(opts["year"])]
    else:
        counts = {y: int(np.sum(ip.dates.astype("datetime64[Y]").astype(int) + 1970 == y)) for y in ip.years()}
        years = [y for y, c in counts.items() if c >= MIN_ROWS_PER_YEAR]
        if not years:
            raise DataError(f"no calendar year has {MIN_ROWS_PER_YEAR} observations")
    calib = CalibrationOptions(
        restarts=int(opts["restarts"]),
        max_iters=int(opts["max_iters"]),
        seed=int(opts["seed"]),
        tolerance=float(opts["tolerance"]),
        workers=int(opts["workers"]),
    )
    out = _Writer(opts)
    for year in years:
        target = yearly_empirical_taus(ip, year, opts["tau_on"])
        res = calibrate(target, opts["family"], calib)
        report = riskiness_report(res)
        out.write(
            f"riskiness_{year}.csv",
            ["entity", "tau_X0_Xj", "tau_X0_Tj"],
            [[r["entity"], r["tau_X0_Xj"], r["tau_X0_Tj"]] for r in report],
        )
        p = res.params
        fit = [
            ["objective", res.objective],
            ["converged", res.converged],
            ["residual_rms", res.residual_rms],
            ["restarts", res.n_restarts_used],
            ["boundary", ";".join(res.boundary)],
            ["lgd", ip.lgd],
            ["rate", ip.rate],
            ["tau_on", opts["tau_on"]],
            ["theta_0", float(p.theta[0])],
        ]
        for j, name in enumerate(target.labels):
            fit += [[f"alpha_{name}", float(p.alpha[j])], [f"theta_{name}", float(p.theta[j + 1])],
                    [f"beta_{name}", float(p.beta[j])]]
        out.write(f"fit_{year}.csv", ["key", "value"], fit)
        pairs = [
            [target.labels[i], target.labels[k], float(target.values[i, k]), float(res.fitted_taus.values[i, k])]
            for i in range(target.d)
            for k in range(i + 1, target.d)
        ]
        out.write(f"taus_{year}.csv", ["entity_i", "entity_k", "empirical", "fitted"], pairs)
        flag = "converged" if res.converged else "NOT converged"
        print(f"{year}: objective {res.objective:.3g} ({flag}), residual rms {res.residual_rms:.3g}")
        print(f"{'entity':>10} {'tau_X0_Xj':>10} {'tau_X0_Tj':>10}")
        for r in report:
            print(f"{r['entity']:>10} {r['tau_X0_Xj']:>10.6f} {r['tau_X0_Tj']:>10.6f}")
    return EXIT_OK


COMMANDS = {"tau": cmd_tau, "simulate": cmd_simulate, "calibrate": cmd_calibrate}


def main(argv=None) -> int:
    try:
        command, opts = resolve_options(argv)
    except SystemExit as exc:  # argparse reports usage errors with code 2
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"sysshock: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if opts["verbose"] else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return COMMANDS[command](opts)
    except (UsageError, ValueError) as exc:
        print(f"sysshock: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"sysshock: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"sysshock: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
