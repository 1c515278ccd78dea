"""Command-line front end: kernel tables, bound queries, curves and kernel caches.

Exit status: 0 success, 2 usage or invalid input, 3 solver/optimiser
failure, 4 coupling-validity failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import DEFAULT_OPT_TOL, SystemParams, bounds_for, check_coulomb_validity, sweep_curve
from .eigensolver import EigensolveConfig, build_kernel, default_kernel, load_kernel, save_kernel, solve_state
from .errors import BoundsError, ConfigurationError, DomainError
from .potentials import parse_potential

log = logging.getLogger("salpeter_bounds")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONVERGENCE = 3
EXIT_VALIDITY = 4


class UsageError(Exception):
    pass


class ValidityError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    n_values: tuple[int, ...]
    masses: tuple[float, ...]
    potential: str | None
    tol_energy: float
    tol_opt: float
    fmt: str
    out: str | None
    kernel_cache: str | None
    cache_action: str | None = None
    cache_path: str | None = None

    @property
    def eigensolve(self):
        return EigensolveConfig(tol_energy=self.tol_energy)


# ---------------------------------------------------------------- parsing


def parse_m_grid(text):
    """``min:max:count:lin|log`` -> tuple of masses (inclusive endpoints)."""
    parts = text.split(":")
    if len(parts) != 4:
        raise UsageError(f"--m-grid expects min:max:count:lin|log, got {text!r}")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"--m-grid: {exc}") from None
    spacing = parts[3]
    if spacing not in ("lin", "log"):
        raise UsageError(f"--m-grid spacing must be lin or log, got {spacing!r}")
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo < 0 or count < 1:
        raise UsageError("--m-grid needs finite min >= 0 and count >= 1")
    if count > 1 and not hi > lo:
        raise UsageError("--m-grid needs max > min when count > 1")
    if count == 1:
        return (lo,)
    if spacing == "log":
        if lo <= 0:
            raise UsageError("--m-grid log spacing needs min > 0")
        grid = np.geomspace(lo, hi, count)
    else:
        grid = np.linspace(lo, hi, count)
    return tuple(float(v) for v in grid)


def parse_n_range(text):
    """``a:b`` (inclusive) or a single integer."""
    try:
        if ":" in text:
            a, b = (int(v) for v in text.split(":"))
        else:
            a = b = int(text)
    except ValueError:
        raise UsageError(f"--n-range expects a:b, got {text!r}") from None
    if a < 2 or b < a:
        raise UsageError(f"--n-range needs 2 <= a <= b, got {text!r}")
    return tuple(range(a, b + 1))


def _positive(name):
    def convert(text):
        try:
            value = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number") from None
        if not (math.isfinite(value) and value > 0):
            raise argparse.ArgumentTypeError(f"{name} must be positive")
        return value

    return convert


def build_parser():
    parser = argparse.ArgumentParser(
        prog="salpeter-bounds",
        description="Energy bounds for N identical bosons with relativistic kinetic energy.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-energy", type=_positive("--tol-energy"), default=1e-8)
    common.add_argument("--tol-opt", type=_positive("--tol-opt"), default=DEFAULT_OPT_TOL)
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    common.add_argument("--out", metavar="PATH", help="write here instead of stdout")
    common.add_argument("--kernel-cache", metavar="PATH", help="load (or create) a kernel table here")

    masses = argparse.ArgumentParser(add_help=False)
    group = masses.add_mutually_exclusive_group()
    group.add_argument("--mass", type=float, help="single mass value")
    group.add_argument("--m-grid", metavar="MIN:MAX:COUNT:lin|log")

    sub = parser.add_subparsers(dest="subcommand", required=True)
    sub.add_parser("kernel", parents=[common, masses], help="tabulate e(m) and e(m) - m")

    p_bounds = sub.add_parser("bounds", parents=[common, masses], help="lower/upper bounds at one N")
    p_bounds.add_argument("--n", type=int, required=True)
    p_bounds.add_argument("--potential", required=True, metavar="power:c=C,q=Q")

    p_curve = sub.add_parser("curve", parents=[common, masses], help="bounds along m for a range of N")
    p_curve.add_argument("--n-range", required=True, metavar="A:B")
    p_curve.add_argument("--potential", required=True, metavar="power:c=C,q=Q")

    p_cache = sub.add_parser("cache", parents=[common], help="build, save or inspect a kernel table")
    p_cache.add_argument("action", choices=("build", "save", "load"))
    p_cache.add_argument("path", nargs="?", help="table file (defaults to --out / --kernel-cache)")
    p_cache.add_argument("--m-grid", metavar="MIN:MAX:COUNT:lin|log", help="initial nodes")
    return parser


def to_run_config(args):
    sub = args.subcommand
    masses = ()
    if getattr(args, "m_grid", None):
        masses = parse_m_grid(args.m_grid)
    elif getattr(args, "mass", None) is not None:
        if not (math.isfinite(args.mass) and args.mass >= 0):
            raise UsageError("--mass must be finite and >= 0")
        masses = (float(args.mass),)
    if sub in ("kernel", "bounds", "curve") and not masses:
        raise UsageError(f"{sub}: give --mass or --m-grid")

    n_values = ()
    if sub == "bounds":
        if args.n < 2:
            raise UsageError("--n must be an integer >= 2")
        n_values = (args.n,)
    elif sub == "curve":
        n_values = parse_n_range(args.n_range)

    potential = getattr(args, "potential", None)
    if potential is not None:
        try:
            spec = parse_potential(potential)
        except DomainError as exc:
            raise UsageError(str(exc)) from None
        if spec.q < -1:
            raise UsageError(f"exponent q must be >= -1, got {spec.q!r}")

    cache_path = None
    if sub == "cache":
        cache_path = args.path or args.out or args.kernel_cache
        if cache_path is None and args.action in ("save", "load"):
            raise UsageError(f"cache {args.action} needs a PATH")
    return RunConfig(
        subcommand=sub,
        n_values=n_values,
        masses=masses,
        potential=potential,
        tol_energy=args.tol_energy,
        tol_opt=args.tol_opt,
        fmt=args.fmt,
        out=args.out,
        kernel_cache=args.kernel_cache,
        cache_action=getattr(args, "action", None),
        cache_path=cache_path,
    )


# ---------------------------------------------------------------- kernels


class LazyKernel:
    """Builds (or loads) the kernel on first evaluation only."""

    def __init__(self, cfg: RunConfig):
        self.run = cfg
        self._kernel = None

    @property
    def kernel(self):
        if self._kernel is None:
            self._kernel = obtain_kernel(self.run)
        return self._kernel

    @property
    def digest(self):
        return self.run.eigensolve.digest()

    def __call__(self, m):
        return self.kernel(m)


def obtain_kernel(run):
    cfg = run.eigensolve
    path = run.kernel_cache
    if path is None:
        return default_kernel(cfg)
    if Path(path).exists():
        k = load_kernel(path)
        if k.config != cfg:
            raise UsageError(
                f"{path} was built with config {k.config.digest()}, requested {cfg.digest()}; "
                "rebuild it with `cache build`"
            )
        log.info("loaded kernel cache %s (%d nodes)", path, k.masses.size)
        return k
    k = default_kernel(cfg)
    save_kernel(k, path)
    log.info("wrote kernel cache %s", path)
    return k


# ---------------------------------------------------------------- output


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render(columns, rows, fmt, metadata):
    if fmt == "json":
        doc = {"metadata": metadata, "columns": list(columns), "rows": [dict(zip(columns, r)) for r in rows]}
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_cell(v) for v in r])
    return buf.getvalue()


def emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def metadata(run, kernel_hash):
    return {
        "version": __version__,
        "subcommand": run.subcommand,
        "tol_energy": run.tol_energy,
        "tol_opt": run.tol_opt,
        "kernel_config_hash": kernel_hash,
        "potential": run.potential,
    }


# ---------------------------------------------------------------- commands


def cmd_kernel(run):
    cfg = run.eigensolve
    rows = []
    for i, m in enumerate(run.masses):
        try:
            e = solve_state(m, cfg).energy
        except BoundsError as exc:
            raise type(exc)(f"row {i} (m={m!r}): {exc}") from exc
        rows.append((m, e, e - m))
    return render(("m", "e", "e_minus_m"), rows, run.fmt, metadata(run, cfg.digest()))


def _coupling_precheck(spec, n_values):
    if spec.q != -1:
        return
    for n in n_values:
        check = check_coulomb_validity(SystemParams(n, 1.0), spec.c)
        if not check.valid:
            raise ValidityError(
                f"N={n}: coupling condition (c/2)sqrt(N(N-1)/2) < 1 fails, margin {check.margin!r}"
            )


def cmd_bounds(run):
    spec = parse_potential(run.potential)
    _coupling_precheck(spec, run.n_values)
    kernel = LazyKernel(run)
    columns = (
        "N", "m", "lower", "upper", "gap_percent", "midpoint_error_percent",
        "t_star", "mu_star", "lower_method", "upper_method",
    )
    rows = []
    for m in run.masses:
        pair = bounds_for(SystemParams(run.n_values[0], m), spec, kernel, run.tol_opt)
        both = pair.lower is not None and pair.upper is not None
        rows.append((
            run.n_values[0],
            m,
            pair.lower.value if pair.lower else None,
            pair.upper.value if pair.upper else None,
            pair.gap_percent if both else None,
            pair.midpoint_error_percent if both else None,
            pair.lower.optimizer if pair.lower else None,
            pair.upper.optimizer if pair.upper else None,
            pair.lower.method if pair.lower else None,
            pair.upper.method if pair.upper else None,
        ))
    return render(columns, rows, run.fmt, metadata(run, kernel.digest))


def cmd_curve(run):
    spec = parse_potential(run.potential)
    _coupling_precheck(spec, run.n_values)
    kernel = LazyKernel(run)
    rows = []
    failed = False
    for n in run.n_values:
        curve = sweep_curve(n, spec, kernel, run.masses, run.tol_opt)
        for r in curve.rows:
            failed |= r.status != "ok"
            rows.append((n, r.m, r.lower, r.upper, r.gap_percent, r.status))
    text = render(
        ("N", "m", "lower", "upper", "gap_percent", "status"), rows, run.fmt, metadata(run, kernel.digest)
    )
    return text, failed


def cmd_cache(run):
    cfg = run.eigensolve
    if run.cache_action == "load":
        k = load_kernel(run.cache_path)
        audit = k.monotonicity_audit()
    else:
        k = build_kernel(run.masses or None, cfg)
        audit = k.monotonicity_audit()
        if run.cache_path is not None:
            save_kernel(k, run.cache_path)
    rows = [(k.config.digest(), int(k.masses.size), float(k.masses[0]), float(k.m_max), bool(audit))]
    columns = ("config_hash", "nodes", "m_min", "m_max", "monotone")
    text = render(columns, rows, run.fmt, metadata(run, k.config.digest()))
    return text


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)

    try:
        run = to_run_config(args)
        if run.subcommand == "kernel":
            emit(cmd_kernel(run), run.out)
        elif run.subcommand == "bounds":
            emit(cmd_bounds(run), run.out)
        elif run.subcommand == "curve":
            text, failed = cmd_curve(run)
            emit(text, run.out)
            if failed:
                print("error: some rows failed; see the status column", file=sys.stderr)
                return EXIT_CONVERGENCE
        else:
            text = cmd_cache(run)
            emit(text, None if run.out == run.cache_path else run.out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValidityError as exc:
        print(f"validity error: {exc}", file=sys.stderr)
        return EXIT_VALIDITY
    except (DomainError, ConfigurationError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BoundsError as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
