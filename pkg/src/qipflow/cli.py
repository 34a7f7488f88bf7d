"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
Option precedence: command-line flag > ``--config`` file > built-in default.
"""
import argparse
import configparser
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import io as qio
from .channels import (LorentzianSpectralDensity, OhmicSpectralDensity, damping_trajectory,
                       dephasing_trajectory, evolve_joint)
from .errors import InvalidInputError, NumericalFailureError, SingularMapError
from .states import bell_phi, concurrence_batch, mutual_information_batch, pure_schmidt, werner
from .witnesses import (InitialStateFamily, n_blp, n_mutual, n_q, n_rhp, optimize_initial_state,
                        qip_flow)

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

DEFAULTS = {
    "convention": "sqrt",
    "tol": 1e-8,
    "alpha": 0.5,
    "omega_c": 1.0,
    "S": 3.0,
    "gamma0": 1.0,
    "lambda_over_gamma0": 0.1,
    "delta": 0.01,
    "method": "closed",
    "state": "bell",
    "r": 1.0,
    "theta": np.pi / 4,
    "family": "bell",
    "pair": "default",
    "jobs": 1,
    "S_values": "1,1.5,2,2.5,3,3.5,4,4.5,5,5.5,6",
    "ratio_values": "10,1,0.5,0.1",
}
GRID_DEFAULTS = {"dephasing": (50.0, 4001), "damping": (60.0, 6001)}
CONVENTIONS = ("eq4", "sqrt")


class ConfigError(InvalidInputError):
    pass


class Settings:
    """Merged view of flags, config file and defaults."""

    def __init__(self, args, config):
        self._args = vars(args)
        self._config = config

    def get(self, key, cast=None, default=None):
        value = self._args.get(key)
        if value is None:
            value = self._config.get(key)
        if value is None:
            value = DEFAULTS.get(key, default)
        if value is None or cast is None:
            return value
        try:
            return cast(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid value for --{key.replace('_', '-')}: {value!r}") from exc

    def require(self, key, cast=None):
        value = self.get(key, cast)
        if value is None:
            raise ConfigError(f"missing required option --{key.replace('_', '-')}")
        return value


def _read_config(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    parser = configparser.ConfigParser(comment_prefixes=("#",), inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string("[config]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc
    return {k.strip().replace("-", "_"): v.strip() for k, v in parser["config"].items()}


def _flag(value):
    if isinstance(value, str):
        return value.strip().lower() in ("1", "true", "yes", "on")
    return bool(value)


def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).split(",") if x.strip()]


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write {out}: {exc}") from exc


# ---------------------------------------------------------------------------
# Building blocks
# ---------------------------------------------------------------------------

def _grid(cfg, kind):
    t_max_default, points_default = GRID_DEFAULTS[kind]
    t_max = cfg.get("t_max", float, t_max_default)
    points = cfg.get("grid_points", int, points_default)
    if not t_max > 0:
        raise ConfigError("--t-max must be positive (the grid is too short)")
    if points < 3:
        raise ConfigError("--grid-points must be at least 3")
    return np.linspace(0.0, t_max, points)


def _channel(cfg, overrides=None):
    """Build the trajectory plus the factor that converts times to natural units."""
    overrides = overrides or {}
    kind = overrides.get("channel") or cfg.require("channel", str)
    if kind not in ("dephasing", "damping"):
        raise ConfigError(f"--channel must be 'dephasing' or 'damping', got {kind!r}")
    grid = _grid(cfg, kind)
    tol = cfg.get("tol", float)
    if kind == "dephasing":
        wc = cfg.get("omega_c", float)
        sd = OhmicSpectralDensity(cfg.get("alpha", float), wc, overrides.get("S", cfg.get("S", float)))
        return dephasing_trajectory(sd, grid / wc, tol), wc
    gamma0 = cfg.get("gamma0", float)
    ratio = overrides.get("lambda_over_gamma0", cfg.get("lambda_over_gamma0", float))
    sd = LorentzianSpectralDensity(gamma0, ratio * gamma0, cfg.get("delta", float) * gamma0)
    method = cfg.get("method", str)
    return damping_trajectory(sd, grid / gamma0, method), gamma0


def _meta(traj, **extra):
    meta = {"channel": traj.kind, "time_unit": qio.time_unit(traj.kind)}
    for key, value in traj.params.items():
        meta[key] = repr(float(value))
    meta.update(extra)
    return meta


def _initial_state(cfg):
    path = cfg.get("state_file", str)
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                return "file", np.asarray(qio.load_density(fh.read()))
        except OSError as exc:
            raise ConfigError(f"cannot read state file {path}: {exc}") from exc
    name = cfg.get("state", str)
    if name == "bell":
        return "bell", bell_phi()
    if name == "werner":
        r = cfg.get("r", float)
        return f"werner(r={r:.6g})", werner(r)
    if name == "pure":
        theta = cfg.get("theta", float)
        return f"pure(theta={theta:.6g})", pure_schmidt(theta)
    raise ConfigError(f"--state must be bell, werner or pure, got {name!r}")


def _convention(cfg):
    conv = cfg.get("convention", str)
    if conv not in CONVENTIONS:
        raise ConfigError(f"--convention must be one of {CONVENTIONS}, got {conv!r}")
    return conv


def _pair(cfg, kind):
    path = cfg.get("pair_file", str)
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read pair file {path}: {exc}") from exc
        states = doc.get("states") if isinstance(doc, dict) else None
        if not isinstance(states, list) or len(states) != 2:
            raise ConfigError("pair file must hold {'states': [state, state]}")
        return tuple(np.asarray(qio.DensityMatrix.from_dict(s)) for s in states)
    name = cfg.get("pair", str)
    if name == "default":
        return None
    if name == "plusminus":
        return (np.full((2, 2), 0.5, dtype=complex),
                np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=complex))
    if name == "zeroone":
        return np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)
    raise ConfigError(f"--pair must be default, plusminus or zeroone, got {name!r}")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_evolve(cfg):
    traj, scale = _channel(cfg)
    columns, rows = qio.trajectory_table(traj, scale)
    _emit(qio.format_csv(columns, rows, _meta(traj)), cfg.get("out", str))


def cmd_qip_flow(cfg):
    traj, scale = _channel(cfg)
    label, rho0 = _initial_state(cfg)
    conv = _convention(cfg)
    q = qip_flow(traj, rho0, conv)
    columns = ["t", "Q"]
    data = [traj.times * scale, q]
    if traj.kind == "dephasing":
        columns.append("Gamma")
        data.append(traj.Gamma)
    else:
        columns.append("absJ")
        data.append(np.abs(traj.J))
    if _flag(cfg.get("compare", default=False)):
        states = evolve_joint(traj, rho0)
        columns += ["C", "I"]
        data += [concurrence_batch(states), mutual_information_batch(states)]
        if traj.kind == "damping":
            columns.append("absJ_half")
            data.append(0.5 * np.abs(traj.J))
    meta = _meta(traj, convention=conv, initial_state=label)
    _emit(qio.format_csv(columns, np.column_stack(data), meta), cfg.get("out", str))


def _measure_report(cfg, which, traj):
    if which == "qip":
        conv = _convention(cfg)
        if cfg.get("state_file", str) or cfg._args.get("state") or cfg._config.get("state"):
            label, rho0 = _initial_state(cfg)
            return n_q(traj, rho0, conv, label)
        family = cfg.get("family", str)
        if traj.kind == "damping" and family == "bell":
            family_obj = InitialStateFamily("werner_grid", (1.0,))
        else:
            family_obj = InitialStateFamily(family)
        return optimize_initial_state(traj, family_obj, conv)
    if which == "blp":
        return n_blp(traj, _pair(cfg, traj.kind))
    if which == "mutual":
        label, rho0 = _initial_state(cfg)
        return n_mutual(traj, rho0, label)
    if which == "rhp":
        return n_rhp(traj)
    raise ConfigError(f"--measure must be qip, blp, mutual or rhp, got {which!r}")


def cmd_measure(cfg):
    which = cfg.require("measure", str)
    traj, scale = _channel(cfg)
    report = _measure_report(cfg, which, traj)
    csv_path = cfg.get("trajectory_csv", str)
    if csv_path:
        cols = ["t", "value"] + (["derivative"] if report.derivative is not None else [])
        data = [report.times * scale, report.samples]
        if report.derivative is not None:
            data.append(report.derivative / scale)
        _emit(qio.format_csv(cols, np.column_stack(data), {"measure": report.measure}), csv_path)
    _emit(qio.format_report(report), cfg.get("out", str))


def _sweep_point(cfg_items, overrides):
    cfg = Settings(argparse.Namespace(**cfg_items[0]), cfg_items[1])
    traj, _ = _channel(cfg, overrides)
    rho0 = bell_phi() if traj.kind == "dephasing" else werner(1.0)
    conv = _convention(cfg)
    return [n_q(traj, rho0, conv).value, n_blp(traj).value,
            n_mutual(traj, rho0).value, n_rhp(traj).value]


def cmd_sweep(cfg):
    kind = cfg.require("channel", str)
    if kind == "dephasing":
        name, values = "S", _floats(cfg.get("S_values"))
    elif kind == "damping":
        name, values = "lambda_over_gamma0", _floats(cfg.get("ratio_values"))
    else:
        raise ConfigError(f"--channel must be 'dephasing' or 'damping', got {kind!r}")
    if not values:
        raise ConfigError("sweep needs at least one parameter value")
    jobs = cfg.get("jobs", int)
    payload = (cfg._args, cfg._config)
    points = [{"channel": kind, name: v} for v in values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_point, [payload] * len(points), points))
    else:
        results = [_sweep_point(payload, p) for p in points]
    rows = [[v] + r for v, r in zip(values, results)]
    meta = {"channel": kind, "convention": _convention(cfg),
            "initial_state": "bell" if kind == "dephasing" else "werner(r=1)"}
    columns = [name, "N_Q", "N_BLP", "N_I", "N_RHP"]
    _emit(qio.format_csv(columns, rows, meta), cfg.get("out", str))


_FIGURE_COLUMNS = {
    "1": ("S", ["N_Q", "N_I", "N_RHP"]),
    "2": ("t", ["Q"]),
    "3": ("t", ["Q", "C", "I", "absJ_half"]),
}


def cmd_plot_script(cfg):
    figure = str(cfg.require("figure", str))
    if figure not in _FIGURE_COLUMNS:
        raise ConfigError(f"--figure must be 1, 2 or 3, got {figure!r}")
    paths = cfg.get("csv") or []
    if isinstance(paths, str):
        paths = [p for p in paths.split(",") if p]
    if not paths:
        raise ConfigError("missing required option --csv")
    xcol, ycols = _FIGURE_COLUMNS[figure]
    lines = ["# gnuplot script", "set datafile separator ','", "set key autotitle columnhead",
             f"set xlabel '{xcol}'"]
    plots = []
    for path in paths:
        if not os.path.isfile(path):
            raise ConfigError(f"CSV file not found: {path}")
        with open(path, encoding="utf-8") as fh:
            _, columns, _ = qio.parse_csv(fh.read())
        if xcol not in columns:
            raise ConfigError(f"{path} has no column {xcol!r}")
        for y in ycols:
            if y not in columns:
                raise ConfigError(f"{path} has no column {y!r}")
            plots.append(f"'{path}' using {columns.index(xcol) + 1}:{columns.index(y) + 1} "
                         f"with lines title '{os.path.basename(path)}:{y}'")
    lines.append("plot " + ", \\\n     ".join(plots))
    _emit("\n".join(lines) + "\n", cfg.get("out", str))


COMMANDS = {
    "evolve": cmd_evolve,
    "qip-flow": cmd_qip_flow,
    "measure": cmd_measure,
    "sweep": cmd_sweep,
    "plot-script": cmd_plot_script,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--config", help="key = value config file")
    g.add_argument("--out", help="output path (default: stdout)")
    g.add_argument("--convention", choices=CONVENTIONS, help="QIP convention (default sqrt)")
    g.add_argument("--tol", type=float, help="quadrature tolerance (default 1e-8)")
    g.add_argument("--grid-points", dest="grid_points", type=int)
    g.add_argument("--t-max", dest="t_max", type=float, help="grid end in natural time units")

    chan = argparse.ArgumentParser(add_help=False)
    c = chan.add_argument_group("channel")
    c.add_argument("--channel", choices=("dephasing", "damping"))
    c.add_argument("--alpha", type=float, help="Ohmic coupling (default 0.5)")
    c.add_argument("--omega-c", dest="omega_c", type=float)
    c.add_argument("--S", dest="S", type=float, help="Ohmicity (default 3)")
    c.add_argument("--gamma0", type=float)
    c.add_argument("--lambda-over-gamma0", dest="lambda_over_gamma0", type=float)
    c.add_argument("--delta", type=float, help="detuning in units of gamma0 (default 0.01)")
    c.add_argument("--method", choices=("closed", "volterra"))

    state = argparse.ArgumentParser(add_help=False)
    s = state.add_argument_group("initial state")
    s.add_argument("--state", choices=("bell", "werner", "pure"))
    s.add_argument("--r", type=float, help="Werner parameter")
    s.add_argument("--theta", type=float, help="Schmidt angle of the pure state")
    s.add_argument("--state-file", dest="state_file", help="JSON density matrix (dims/re/im)")

    parser = argparse.ArgumentParser(prog="qipflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("evolve", parents=[common, chan], help="write a channel trajectory CSV")
    p = sub.add_parser("qip-flow", parents=[common, chan, state], help="write Q(t) CSV")
    p.add_argument("--compare", action="store_true", default=None,
                   help="add concurrence and mutual-information columns")
    p = sub.add_parser("measure", parents=[common, chan, state], help="write a measure report")
    p.add_argument("--measure", choices=("qip", "blp", "mutual", "rhp"))
    p.add_argument("--family", choices=("bell", "werner_grid", "pure_grid"))
    p.add_argument("--pair", choices=("default", "plusminus", "zeroone"))
    p.add_argument("--pair-file", dest="pair_file")
    p.add_argument("--trajectory-csv", dest="trajectory_csv")
    p = sub.add_parser("sweep", parents=[common, chan], help="measure values over a parameter sweep")
    p.add_argument("--S-values", dest="S_values")
    p.add_argument("--ratio-values", dest="ratio_values")
    p.add_argument("--jobs", type=int)
    p = sub.add_parser("plot-script", parents=[common], help="emit a gnuplot script")
    p.add_argument("--figure", choices=("1", "2", "3"))
    p.add_argument("--csv", action="append")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = Settings(args, _read_config(args.config))
        COMMANDS[args.command](cfg)
    except InvalidInputError as exc:
        print(f"qipflow {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailureError, SingularMapError, FloatingPointError) as exc:
        print(f"qipflow {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
    return 0


if __name__ == "__main__":
    sys.exit(main())
