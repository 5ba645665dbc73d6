"""``wavobs`` experiment runner: spectrum, constants, control and filter tables as CSV.

Configuration is an INI-style file (``key = value`` lines under ``[section]`` headers)::

    [run]
    N = 16, 32, 64
    T = 8
    workers = 2
    out = results

    [constants]
    pipelines = classical, truncated, filter:cesaro, mixed, nitsche-sym:0.8, nitsche-sym:0.8:drop

    [control]
    pipelines = classical, filter:cesaro, filter:exponential:6, mixed, nitsche-sym:1, nitsche-nonsym:1
    n_t = 0                 ; 0 means 32 N samples

    [filters]
    filters = cesaro, lanczos, raised-cosine, sharpened-raised-cosine, vandeven:4, exponential:4
    points = 101

    [tolerances]
    ridge = 1e-12

Keys in ``[run]`` may be repeated in a command's own section to override them there.
Command-line flags override the file.
"""
import argparse
from concurrent.futures import ProcessPoolExecutor
import configparser
import csv
from dataclasses import asdict, fields
import hashlib
import json
import logging
import math
from pathlib import Path
import sys

import numpy as np

from . import __version__
from .errors import WavobsError
from .filters import Filter, sigma
from .hum import error_norms, exact_example, solve_control
from .kernels import Tolerances, get_tolerances, set_tolerances
from .observability import continuous_sqrt_lambdas, observability_constants, spectrum
from .pipelines import build
from .assembly import Formulation, assemble

log = logging.getLogger("wavobs")

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 2, 3

DEFAULTS = {
    "spectrum": {"N": "40"},
    "constants": {"N": "16, 32, 64", "T": "8", "pipelines": "classical"},
    "control": {"N": "32, 64, 128", "T": "8", "pipelines": "mixed", "n_t": "0"},
    "filters": {
        "filters": "cesaro, lanczos, raised-cosine, sharpened-raised-cosine, vandeven:4, exponential:4",
        "points": "101",
    },
}


class UsageError(Exception):
    pass


def fmt(x):
    """Fixed 17-significant-digit rendering so identical runs give identical bytes."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.17g}"


def _split_list(text):
    return [item.strip() for item in text.split(",") if item.strip()]


def _int_list(text):
    try:
        values = [int(v) for v in _split_list(text)]
    except ValueError:
        raise UsageError(f"N-list must be integers, got {text!r}") from None
    if not values:
        raise UsageError("N-list is empty")
    if values[0] < 4:
        raise UsageError(f"polynomial degree N must be >= 4, got {values[0]}")
    if values != sorted(values) or len(set(values)) != len(values):
        raise UsageError(f"N-list must be strictly ascending, got {values}")
    return values


def resolve_config(command, args):
    """Merge defaults, the config file and command-line flags into one plain dict."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    if args.config:
        if not Path(args.config).is_file():
            raise UsageError(f"config file not found: {args.config}")
        parser.read(args.config)
    raw = dict(DEFAULTS[command])
    for section in ("run", command):
        if parser.has_section(section):
            raw.update(parser.items(section))

    tol_overrides = {}
    if parser.has_section("tolerances"):
        names = {f.name for f in fields(Tolerances)}
        for key, value in parser.items("tolerances"):
            if key not in names:
                raise UsageError(f"unknown tolerance {key!r}")
            tol_overrides[key] = float(value)

    cfg = {"command": command, "out": args.out or raw.get("out", "."),
           "workers": args.workers or int(raw.get("workers", 1))}
    if command in ("spectrum", "constants", "control"):
        cfg["N"] = _int_list(",".join(str(n) for n in args.N) if args.N else raw["N"])
    if command in ("constants", "control"):
        cfg["T"] = float(args.T) if args.T is not None else float(raw["T"])
        if not cfg["T"] > 0:
            raise UsageError(f"T must be > 0, got {cfg['T']}")
        pipelines = list(args.pipeline) if args.pipeline else _split_list(raw["pipelines"])
        pipelines += [f"filter:{f}" for f in args.filter or []]
        if args.gamma is not None:
            pipelines = [_with_gamma(p, args.gamma) for p in pipelines]
        if not pipelines:
            raise UsageError("no pipelines selected")
        for spec in pipelines:
            try:
                build(spec, 4)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
        cfg["pipelines"] = pipelines
    if command == "control":
        if cfg["T"] != exact_example().T:
            raise UsageError(f"the reference control problem is posed on T = {exact_example().T:g}")
        cfg["n_t"] = int(args.n_t) if args.n_t is not None else int(raw["n_t"])
    if command == "filters":
        cfg["filters"] = list(args.filter) if args.filter else _split_list(raw["filters"])
        cfg["points"] = int(raw["points"])
        if cfg["points"] < 2:
            raise UsageError("filters need at least 2 grid points")
    cfg["tolerances"] = tol_overrides
    return cfg


def _with_gamma(pipeline, gamma):
    parts = pipeline.split(":")
    if parts[0] in ("nitsche-sym", "nitsche-nonsym"):
        tail = parts[2:] if len(parts) > 2 else []
        return ":".join([parts[0], f"{gamma:g}"] + tail)
    return pipeline


def config_hash(cfg):
    """Hash of everything that affects the numbers (output location and worker count do not)."""
    relevant = {k: v for k, v in cfg.items() if k not in ("out", "workers")}
    blob = json.dumps(relevant, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _header_comment(cfg):
    tol = json.dumps(asdict(get_tolerances()), sort_keys=True, separators=(",", ":"))
    return f"# wavobs {__version__} {cfg['command']} config_sha256={config_hash(cfg)} tolerances={tol}\n"


def write_csv(path, cfg, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(_header_comment(cfg))
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
    log.info("wrote %s (%d rows)", path, len(rows))


def _run_tasks(func, tasks, workers, tolerances):
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                 initargs=(tolerances,)) as pool:
            return list(pool.map(func, tasks))
    return [func(t) for t in tasks]


def _init_worker(tolerances):
    if tolerances:
        set_tolerances(**tolerances)


def _spectrum_rows(N):
    report = spectrum(assemble(Formulation.classical(), N))
    k = np.arange(1, N)
    ref = continuous_sqrt_lambdas(k)
    return [(N, int(kk), s, r, g, d) for kk, s, r, g, d in
            zip(k, report.sqrt_lambdas, ref, report.sqrt_gaps, report.deltas)]


def cmd_spectrum(cfg):
    results = _run_tasks(_spectrum_rows, cfg["N"], cfg["workers"], cfg["tolerances"])
    rows = [row for block in results for row in block]
    write_csv(Path(cfg["out"]) / "spectrum.csv", cfg,
              ["N", "k", "sqrt_lambda", "k_pi", "gap", "delta"], rows)
    return EXIT_OK


def _constants_task(task):
    pipeline, N, T = task
    try:
        p = build(pipeline, N)
        g = observability_constants(p.system, T, p.obs_row, p.subspace, p.tag)
        return (pipeline, N, T, g.c_NT, g.C_NT, g.asymmetry, "")
    except (WavobsError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return (pipeline, N, T, math.nan, math.nan, math.nan, f"{type(exc).__name__}: {exc}")


def cmd_constants(cfg):
    tasks = [(p, N, cfg["T"]) for p in cfg["pipelines"] for N in cfg["N"]]
    rows = _run_tasks(_constants_task, tasks, cfg["workers"], cfg["tolerances"])
    write_csv(Path(cfg["out"]) / "constants.csv", cfg,
              ["pipeline", "N", "T", "c_NT", "C_NT", "gramian_check_residual", "error"], rows)
    return EXIT_NUMERICAL if any(r[-1] for r in rows) else EXIT_OK


def _control_task(task):
    pipeline, N, T, n_t = task
    exact = exact_example()
    try:
        p = build(pipeline, N)
        res = solve_control(exact.problem(), p.system, p.obs_row, n_t=n_t or None, subspace=p.subspace)
        e_u0, e_u1, e_v = error_norms(res, p.system, exact)
        samples = list(zip(res.times, res.v_samples))
        return samples, (pipeline, N, e_u0, e_u1, e_v, e_u1 / _U1_NORM, e_v / _V_NORM, res.c_NT,
                         res.fallback or "", "")
    except (WavobsError, ArithmeticError, np.linalg.LinAlgError) as exc:
        nan = math.nan
        return [], (pipeline, N, nan, nan, nan, nan, nan, nan, "", f"{type(exc).__name__}: {exc}")


# exact norms of the reference data: ||u1||_{L^2} and ||v||_{L^2(0, 8)}
_U1_NORM = math.sqrt(1.0 / 6.0)
_V_NORM = math.sqrt(2.0 / 3.0)


def cmd_control(cfg):
    tasks = [(p, N, cfg["T"], cfg["n_t"]) for p in cfg["pipelines"] for N in cfg["N"]]
    results = _run_tasks(_control_task, tasks, cfg["workers"], cfg["tolerances"])
    exact = exact_example()
    n_ref = max(cfg["n_t"] or 32 * max(cfg["N"]), 2)
    t_ref = np.linspace(0.0, exact.T, n_ref + 1)
    controls = [("exact", "", t, v) for t, v in zip(t_ref, exact.v(t_ref))]
    errors = []
    for (pipeline, N, _, _), (samples, err) in zip(tasks, results):
        controls.extend((pipeline, N, t, v) for t, v in samples)
        errors.append(err)
    out = Path(cfg["out"])
    write_csv(out / "controls.csv", cfg, ["pipeline", "N", "t", "vN"], controls)
    write_csv(out / "errors.csv", cfg,
              ["pipeline", "N", "e_u0", "e_u1", "e_v", "e_u1_rel", "e_v_rel", "c_NT", "fallback", "error"],
              errors)
    return EXIT_NUMERICAL if any(e[-1] for e in errors) else EXIT_OK


def cmd_filters(cfg):
    try:
        filters = [Filter.parse(f) for f in cfg["filters"]]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    eta = np.linspace(0.0, 1.0, cfg["points"])
    rows = [(str(f), e, s) for f in filters for e, s in zip(eta, sigma(f, eta))]
    write_csv(Path(cfg["out"]) / "filters.csv", cfg, ["filter", "eta", "sigma"], rows)
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "constants": cmd_constants,
    "control": cmd_control,
    "filters": cmd_filters,
}


def make_parser():
    parser = argparse.ArgumentParser(prog="wavobs", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="INI-style configuration file")
        p.add_argument("--out", help="output directory (default: current directory)")
        p.add_argument("--workers", type=int, help="parallel worker processes")
        p.add_argument("--N", type=int, nargs="*", help="polynomial degrees (ascending)")
        p.add_argument("--T", type=float, help="observation horizon")
        p.add_argument("--gamma", type=float, help="override the Nitsche penalty in every Nitsche pipeline")
        p.add_argument("--filter", action="append", help="filter spec name[:p[:alpha]]; repeatable")
        p.add_argument("--pipeline", action="append", help="pipeline spec; repeatable")
        p.add_argument("--n-t", dest="n_t", type=int, help="control time samples (control only)")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.N is not None and not args.N:
        parser.error("--N needs at least one value")
    try:
        cfg = resolve_config(args.command, args)
        if cfg["tolerances"]:
            set_tolerances(**cfg["tolerances"])
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        parser.error(str(exc))
    except WavobsError as exc:
        print(f"wavobs: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
