"""Command-line front end.

Each subcommand resolves its options (built-in defaults, then an optional
``key = value`` config file, then flags), runs one computation and writes
either a CSV table or a single JSON object.  Both embed the resolved
configuration and the package version, so a result file is enough to
reproduce itself.

Exit codes: 0 success, 2 usage error, 3 accuracy failure, 4 search failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import io
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .channels import make_channel
from .errors import (
    AccuracyFailure,
    CalibrationFailure,
    InvalidArgument,
    NoSignChange,
    ResolutionFailure,
    SearchFailure,
    SingularEvaluation,
)

EXIT_OK, EXIT_USAGE, EXIT_ACCURACY, EXIT_SEARCH = 0, 2, 3, 4
THREADS_ENV = "CONTACTSPEC_THREADS"


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- parsing helpers

def _range(text):
    """``a:b:step`` (inclusive), ``a:b`` (step 1) or a single number."""
    parts = text.split(":")
    try:
        nums = [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}; expected start:stop:step")
    if len(nums) == 1:
        return np.array(nums)
    if len(nums) not in (2, 3):
        raise argparse.ArgumentTypeError(f"bad range {text!r}; expected start:stop:step")
    start, stop = nums[0], nums[1]
    step = nums[2] if len(nums) == 3 else 1.0
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError(f"bad range {text!r}; need start <= stop and step > 0")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    # drop the binary noise of start + i*step beyond 12 significant digits
    return np.array([float(f"{x:.12g}") for x in start + step * np.arange(count)])


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}")


_PROFILE_ALIASES = {
    "square": "square_well", "square_well": "square_well",
    "gauss": "gaussian", "gaussian": "gaussian",
    "exp": "exponential", "exponential": "exponential",
}


def _potential(text):
    """``profile:depth=D,range=R`` with profile square, gaussian or exponential."""
    name, _, rest = text.partition(":")
    profile = _PROFILE_ALIASES.get(name.strip().lower())
    if profile is None:
        raise argparse.ArgumentTypeError(f"unknown profile {name!r}; use square, gaussian or exponential")
    params = {"depth": None, "range": 1.0}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq or key not in params:
            raise argparse.ArgumentTypeError(f"bad potential parameter {item!r}; keys are depth, range")
        params[key] = float(value)
    if params["depth"] is None:
        raise argparse.ArgumentTypeError("potential needs depth=...")
    return {"profile": profile, **params}


def _key_values(items):
    out = {}
    for item in items or []:
        for piece in item.split(","):
            key, eq, value = piece.partition("=")
            if not eq:
                raise UsageError(f"expected key=value, got {piece!r}")
            out[key.strip()] = float(value)
    return out


# ---------------------------------------------------------------- subcommands

def _cmd_channel(args, workers):
    cf = make_channel(args.mass, args.l, args.stat, args.mult)
    s = args.s
    lam = np.atleast_1d(cf(s))
    rows = [[float(a), float(b)] for a, b in zip(s, lam)]
    return {
        "results": {"rows": len(rows)},
        "diagnostics": {"calibration_gamma": cf.gamma, "quadrature": dataclasses.asdict(cf.quadrature)},
        "table": (["s", "Lambda"], rows),
    }


def _cmd_thresholds(args, workers):
    from .spectra import thresholds

    rep = thresholds(args.l, args.stat, args.mult, t_adm=args.t_adm)
    d = rep.as_dict()
    diag = d.pop("diagnostics")
    return {"results": d, "diagnostics": diag}


def _cmd_efimov(args, workers):
    from .spectra import efimov_exponent_uncertainty, efimov_tower, geometric_ratio

    cf = make_channel(args.mass, args.l, args.stat, args.mult)
    found = efimov_exponent_uncertainty(cf)
    diag = {"calibration_gamma": cf.gamma, "Lambda_at_0": float(cf(0.0))}
    if found is None:
        diag["message"] = "no Efimov channel: Lambda(0) >= 0"
        return {"results": {"s0": None, "s0_error": None, "ratio": None}, "diagnostics": diag}
    s0, err = found
    results = {"s0": s0, "s0_error": err, "ratio": geometric_ratio(s0)}
    table = None
    if args.tower is not None:
        opts = {"r0": 1.0, "R": 1e6, **_key_values(args.tower)}
        unknown = set(opts) - {"r0", "R"}
        if unknown:
            raise UsageError(f"unknown tower keys {sorted(unknown)}; use r0 and R")
        tower = efimov_tower(s0, opts["r0"], opts["R"], n_grid=args.n_grid)
        d = tower.as_dict()
        results.update(tower=d["tower"], pair_ratios=d["pair_ratios"])
        diag["expected_pair_ratio"] = d["expected_pair_ratio"]
        diag["tower_r0"], diag["tower_R"] = opts["r0"], opts["R"]
        rows = [[i, e, (tower.tower[i + 1] / e if i + 1 < len(tower.tower) else "")]
                for i, e in enumerate(tower.tower)]
        table = (["n", "energy", "next_ratio"], rows)
    return {"results": results, "diagnostics": diag, "table": table}


def _trial_grid(args):
    from .fourbody import TrialFunction, TrialKind, default_trial_grid

    if args.widths is None and args.skews is None:
        return default_trial_grid()
    widths = args.widths or "0.5:0.5,1:1,2:2,0.5:2,1:3"
    skews = args.skews if args.skews is not None else [0.0, 0.4]
    grid = []
    for pair in widths.split(","):
        try:
            a, b = (float(x) for x in pair.split(":"))
        except ValueError:
            raise UsageError(f"bad width pair {pair!r}; expected a:b")
        # equal widths have no swap-odd part
        for swap in (1, -1) if a != b else (1,):
            for g in skews:
                grid.append(TrialFunction(TrialKind.GAUSSIAN_TIMES_ODD, a, b, g * math.sqrt(a * b), -1, swap))
    return grid


def _cmd_fourbody(args, workers):
    from .fourbody import TrialFunction, form_value, positivity_scan, quadrimer_channel
    from .spectra import efimov_exponent_uncertainty

    if args.stat == "fermion":
        rep = positivity_scan(_trial_grid(args), args.samples, args.seed, workers=workers).as_dict()
        trials = rep.pop("trials")
        cols = ["a", "b", "gamma", "swap", "quotient", "std_error"]
        rows = [[t[c] for c in cols] for t in trials]
        results = {**rep, "trials": trials}
        return {"results": results, "diagnostics": {"threshold_sigma": -3.0}, "table": (cols, rows)}
    cf = quadrimer_channel(args.m_eff)
    found = efimov_exponent_uncertainty(cf)
    phi = TrialFunction("gaussian", 1.0, 1.0, 0.0, 1, 1)
    c3 = form_value("C3", phi, args.samples, args.seed, workers=workers)
    results = {
        "m_eff": args.m_eff,
        "quadrimer_s0": None if found is None else found[0],
        "quadrimer_s0_error": None if found is None else found[1],
        "c3_symmetric_gaussian": c3.value,
        "c3_std_error": c3.std_error,
        "c3_negative": c3.value + 3.0 * c3.std_error < 0,
    }
    return {"results": results, "diagnostics": {"Lambda_at_0": float(cf(0.0)), "c3_imprecise": c3.imprecise}}


def _cmd_epsilon(args, workers):
    from .epsilon_lab import (
        RadialPotential,
        ScaledPotential,
        birman_schwinger_eigs,
        bound_states,
        l1_norm,
        scattering_length,
    )

    p = args.pot
    base = RadialPotential(p["profile"], p["depth"], p["range"])
    power = {2: "point_2", 3: "contact_3"}[args.scaling]
    probes = [x.strip() for x in args.probe.split(",") if x.strip()]
    known = {"a", "bs", "bound", "l1"}
    if set(probes) - known:
        raise UsageError(f"unknown probes {sorted(set(probes) - known)}; choose from {sorted(known)}")
    cols = ["eps"]
    if "a" in probes:
        cols += ["a", "a_over_eps"]
    if "bs" in probes:
        cols += ["bs_max"]
    if "bound" in probes:
        cols += ["n_bound", "e_ground", "eps2_e_ground"]
    if "l1" in probes:
        cols += ["l1"]
    rows = []
    for eps in args.eps:
        V = ScaledPotential(base, eps, power)
        row = [eps]
        if "a" in probes:
            a = scattering_length(V)
            row += [a, a / eps]
        if "bs" in probes:
            row += [birman_schwinger_eigs(V, args.lam)[0]]
        if "bound" in probes:
            levels = bound_states(V, 0)
            e0 = levels[0] if levels else ""
            row += [len(levels), e0, e0 * eps**2 if levels else ""]
        if "l1" in probes:
            row += [l1_norm(V)]
        rows.append(row)
    diag = {"base_l1": l1_norm(base), "scaling_exponent": args.scaling}
    return {"results": {"rows": len(rows)}, "diagnostics": diag, "table": (cols, rows)}


def _cmd_nls(args, workers):
    from .epsilon_lab import NLSPairState, max_kinetic_eigenvalue, nls_pair_evolve

    state = NLSPairState.gaussian(args.sigma1, args.sigma2, args.c, args.m1, args.m2, args.grid, args.extent)
    bound = max_kinetic_eigenvalue(state)
    if abs(args.dt) * bound >= 0.5:
        raise UsageError(f"dt = {args.dt:g} violates the stability bound |dt| * {bound:.6g} < 0.5; "
                         f"use |dt| < {0.5 / bound:.6g}")
    w = 4.0 * math.pi * state.h * state.r**2

    def row(s, steps):
        n1, n2 = s.norms()
        overlap = abs(w @ (np.conj(s.phi1) * s.phi2)) / math.sqrt(n1 * n2)
        r1, r2 = s.second_moments()
        # steps * dt rather than the accumulated time, which drifts in the last digit
        return [float(f"{steps * args.dt:.12g}"), n1, n2, overlap, r1, r2]

    rows = [row(state, 0)]
    done = 0
    every = max(1, args.every)
    while done < args.steps:
        k = min(every, args.steps - done)
        state = nls_pair_evolve(state, args.dt, k)
        done += k
        rows.append(row(state, done))
    cols = ["t", "norm1", "norm2", "overlap", "r2_1", "r2_2"]
    diag = {"stability_product": abs(args.dt) * bound, "norm_drift": [rows[-1][1] - rows[0][1], rows[-1][2] - rows[0][2]]}
    return {"results": {"rows": len(rows)}, "diagnostics": diag, "table": (cols, rows)}


# ---------------------------------------------------------------- parser

def _stat(text):
    text = text.lower()
    if text not in ("fermion", "boson"):
        raise argparse.ArgumentTypeError("statistics must be fermion or boson")
    return text


def _positive_int(text):
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; [common] and per-subcommand sections supply defaults")
    common.add_argument("--format", choices=("csv", "json"), help="output format (default per subcommand)")
    common.add_argument("--output", "-o", help="output file (default standard output)")
    common.add_argument("--threads", type=_positive_int, help=f"worker threads (default ${THREADS_ENV} or 1)")
    common.add_argument("--timing", action="store_true", help="record wall time (output is then not reproducible)")

    parser = argparse.ArgumentParser(prog="contactspec", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"contactspec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("channel", parents=[common], help="tabulate Lambda_l(s)")
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--l", type=int, default=0)
    p.add_argument("--stat", type=_stat, default="boson")
    p.add_argument("--mult", type=int, default=1)
    p.add_argument("--s", type=_range, default=_range("0:5:0.5"), help="start:stop:step")
    p.set_defaults(func=_cmd_channel, default_format="csv")

    p = sub.add_parser("thresholds", parents=[common], help="mass thresholds m* and m**")
    p.add_argument("--l", type=int, default=1)
    p.add_argument("--stat", type=_stat, default="fermion")
    p.add_argument("--mult", type=int, default=1)
    p.add_argument("--t-adm", type=float, default=None, help="admissibility exponent (default: calibrated)")
    p.set_defaults(func=_cmd_thresholds, default_format="json")

    p = sub.add_parser("efimov", parents=[common], help="Efimov exponent and model tower")
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--l", type=int, default=0)
    p.add_argument("--stat", type=_stat, default="boson")
    p.add_argument("--mult", type=int, default=2)
    p.add_argument("--tower", nargs="*", default=None, metavar="KEY=VALUE", help="r0=... R=...")
    p.add_argument("--n-grid", type=int, default=4000)
    p.set_defaults(func=_cmd_efimov, default_format="json")

    p = sub.add_parser("fourbody", parents=[common], help="2+2 positivity scan or quadrimer channel")
    p.add_argument("--stat", type=_stat, default="fermion")
    p.add_argument("--samples", type=_positive_int, default=10**6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--widths", default=None, help="a:b pairs, comma separated")
    p.add_argument("--skews", type=_float_list, default=None, help="gamma / sqrt(ab) values")
    p.add_argument("--m-eff", type=float, default=1.0)
    p.set_defaults(func=_cmd_fourbody, default_format="json")

    p = sub.add_parser("epsilon", parents=[common], help="shrinking-potential probes")
    p.add_argument("--pot", type=_potential, default=_potential("square:depth=2.4674011002723395,range=1"))
    p.add_argument("--scaling", type=int, choices=(2, 3), default=3)
    p.add_argument("--eps", type=_float_list, default=[1.0, 0.5, 0.25])
    p.add_argument("--probe", default="a", help="comma list of a, bs, bound, l1")
    p.add_argument("--lambda", dest="lam", type=float, default=1e-6)
    p.set_defaults(func=_cmd_epsilon, default_format="csv")

    p = sub.add_parser("nls", parents=[common], help="coupled cubic pair evolution")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--m1", type=float, default=1.0)
    p.add_argument("--m2", type=float, default=1.0)
    p.add_argument("--sigma1", type=float, default=1.0)
    p.add_argument("--sigma2", type=float, default=None)
    p.add_argument("--grid", type=_positive_int, default=400)
    p.add_argument("--extent", type=float, default=20.0)
    p.add_argument("--dt", type=float, default=1e-4)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--every", type=int, default=100)
    p.set_defaults(func=_cmd_nls, default_format="csv")
    return parser


_NOT_CONFIG = {"func", "default_format", "command", "config", "output", "threads", "timing"}


def _apply_config(parser, args, argv):
    """Re-parse with config-file values as defaults so flags still win."""
    cp = configparser.ConfigParser()
    if not cp.read(args.config):
        raise UsageError(f"cannot read config file {args.config!r}")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    dests = {a.dest: a for a in sub._actions if a.dest not in _NOT_CONFIG and a.dest != "help"}
    values = {}
    for section in ("common", args.command):
        if not cp.has_section(section):
            continue
        for key, raw in cp.items(section):
            dest = key.replace("-", "_")
            if dest not in dests:
                raise UsageError(f"unknown config key {key!r} in [{section}]")
            action = dests[dest]
            if action.nargs == "*":
                values[dest] = raw.split()
            elif action.type is not None:
                try:
                    values[dest] = action.type(raw)
                except (argparse.ArgumentTypeError, ValueError) as exc:
                    raise UsageError(f"config key {key!r}: {exc}")
            else:
                values[dest] = raw
    unknown = set(cp.sections()) - {"common", *parser._subparsers._group_actions[0].choices}
    if unknown:
        raise UsageError(f"unknown config sections {sorted(unknown)}")
    sub.set_defaults(**values)
    return parser.parse_args(argv)


def _resolved_config(args):
    out = {"command": args.command}
    for key, value in sorted(vars(args).items()):
        if key in _NOT_CONFIG:
            continue
        out[key] = value
    out["format"] = args.format or args.default_format
    return _jsonable(out)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if hasattr(x, "value") and isinstance(getattr(x, "value"), str):
        return x.value
    return x


def _nested(v):
    return isinstance(v, dict) or (isinstance(v, list) and any(isinstance(x, (dict, list)) for x in v))


def _cell(v):
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    return str(v)


def _render(fmt, config, outcome, wall):
    envelope = {
        "version": __version__,
        "inputs": config,
        "results": _jsonable(outcome["results"]),
        "diagnostics": _jsonable(outcome.get("diagnostics") or {}),
        "wall_time": wall,
    }
    if fmt == "json":
        table = outcome.get("table")
        if table is not None:
            cols, rows = table
            envelope["results"]["table"] = {"columns": cols, "rows": _jsonable(rows)}
        return json.dumps(envelope, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write(f"# contactspec {__version__}\n")
    buf.write(f"# config: {json.dumps(config, sort_keys=True)}\n")
    buf.write(f"# diagnostics: {json.dumps(envelope['diagnostics'], sort_keys=True)}\n")
    if wall is not None:
        buf.write(f"# wall_time: {wall!r}\n")
    table = outcome.get("table")
    if table is not None:
        scalars = {k: v for k, v in envelope["results"].items() if not _nested(v)}
        buf.write(f"# results: {json.dumps(scalars, sort_keys=True)}\n")
    else:
        flat = {k: v for k, v in envelope["results"].items() if not isinstance(v, (dict, list))}
        table = (list(flat), [list(flat.values())])
    cols, rows = table
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for r in rows:
        writer.writerow(["" if v is None else _cell(v) for v in _jsonable(r)])
    return buf.getvalue()


def _threads(args):
    if args.threads is not None:
        return args.threads
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
        if value <= 0:
            raise UsageError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
        return value
    return 1


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.config:
            args = _apply_config(parser, args, argv)
        workers = _threads(args)
        start = time.perf_counter()
        outcome = args.func(args, workers)
        wall = time.perf_counter() - start if args.timing else None
        text = _render(args.format or args.default_format, _resolved_config(args), outcome, wall)
    except (UsageError, InvalidArgument) as exc:
        print(f"contactspec {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AccuracyFailure, CalibrationFailure, ResolutionFailure, SingularEvaluation) as exc:
        print(f"contactspec {args.command}: accuracy failure: {exc}", file=sys.stderr)
        return EXIT_ACCURACY
    except (SearchFailure, NoSignChange) as exc:
        print(f"contactspec {args.command}: search failure: {exc}", file=sys.stderr)
        return EXIT_SEARCH
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
