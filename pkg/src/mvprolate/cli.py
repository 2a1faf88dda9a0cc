"""
Command-line surface.

    mvprolate verify       --n 4 --p 1 --N 10 --alpha 0.3
    mvprolate spectrum     --N 15 --alpha 0.3 --format csv
    mvprolate kernel-check --grid 12
    mvprolate reconstruct  --noise 0 --modes all --alpha 0.9

Machine-readable output goes to stdout (or --out), logs to stderr.
Exit codes: 0 pass, 1 check failure, 2 bad parameters, 3 IO error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from typing import Any, Sequence

import numpy as np

from . import __version__
from .errors import DomainError, MvProlateError, ParameterError
from .matpoly import Params
from .quadrature import QuadPolicy
from .timeband import (
    CoeffVec,
    TBConfig,
    eigenfunctions,
    evaluate_coeffs,
    kernel_identity_grid,
    prolate_spectrum,
    reconstruct,
)
from .verify import anomaly_report, run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_PARAMS = 2
EXIT_IO = 3

MUTATIONS = ("drop-e0",)


def _clean(value: Any) -> Any:
    """Non-finite floats become strings so the JSON stays standard."""
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def _fmt(value: float) -> str:
    return "%.16e" % value


def _params_record(args: argparse.Namespace) -> dict[str, Any]:
    return {
        "n": args.n,
        "p": args.p,
        "N": args.N,
        "alpha": args.alpha,
        "quad_order": args.quad_order,
        "tol": args.tol,
        "mutate": args.mutate,
    }


def _config(args: argparse.Namespace, diagnostic: bool = False) -> TBConfig:
    return TBConfig(
        params=Params(args.n, args.p),
        big_n=args.N,
        alpha=args.alpha,
        quad=QuadPolicy(order=args.quad_order),
        include_e0=args.mutate != "drop-e0",
        workers=args.workers,
        diagnostic=diagnostic,
    )


def _emit(args: argparse.Namespace, text: str) -> None:
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as f:
            f.write(text)


def _json(args: argparse.Namespace, key: str, body: Any) -> str:
    payload = {"params": _params_record(args), key: body, "tool_version": __version__}
    return json.dumps(_clean(payload), indent=2) + "\n"


def _csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
    return buffer.getvalue()


# -----------------------------------------------------------------------------
# SUBCOMMANDS
# -----------------------------------------------------------------------------


def cmd_verify(args: argparse.Namespace) -> int:
    if args.report_anomalies and args.format == "csv":
        raise ParameterError("--report-anomalies is written in JSON output only")

    config = _config(args)
    report = run_suite(config, tol=args.tol, seed=args.seed)

    if args.format == "csv":
        rows = [
            (r["name"], float(r["residual"]), float(r["tolerance"]), str(r["pass"]).lower())
            for r in report.records()
        ]
        text = _csv(("name", "residual", "tolerance", "pass"), rows)
    else:
        payload = {"params": _params_record(args), "checks": report.records()}
        if args.report_anomalies:
            payload["anomalies"] = anomaly_report(config)
        payload["tool_version"] = __version__
        text = json.dumps(_clean(payload), indent=2) + "\n"

    _emit(args, text)

    for failure in report.failures():
        logger.warning("Check %s failed (residual %.3e)", failure.check.name, failure.check.residual)

    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_spectrum(args: argparse.Namespace) -> int:
    config = _config(args)
    report = prolate_spectrum(config)

    if args.format == "csv":
        rows = [
            (m.index, m.b_eigenvalue, m.s_eigenvalue, m.cross_residual, m.cluster)
            for m in report.modes
        ]
        text = _csv(("index", "b_eig", "s_eig", "cross_residual", "cluster"), rows)
    else:
        text = _json(args, "spectrum", report.as_dict())

    _emit(args, text)

    if args.eigenfunctions:
        x, values = eigenfunctions(report, config)
        rows = [
            (mode, float(x[k]), float(values[mode, k, 0]), float(values[mode, k, 1]))
            for mode in range(values.shape[0])
            for k in range(x.size)
        ]
        with open(args.eigenfunctions, "w", encoding="utf-8", newline="") as f:
            f.write(_csv(("mode", "x", "f1", "f2"), rows))

    return EXIT_OK


def cmd_kernel_check(args: argparse.Namespace) -> int:
    config = _config(args)
    records = kernel_identity_grid(config, args.grid)

    if args.format == "json":
        text = _json(args, "checks", records)
    else:
        rows = [(r["x"], r["y"], r["residual"], r["bound"]) for r in records]
        text = _csv(("x", "y", "residual", "bound"), rows)

    _emit(args, text)
    return EXIT_OK if all(r["residual"] <= r["bound"] for r in records) else EXIT_FAILED


def cmd_reconstruct(args: argparse.Namespace) -> int:
    config = _config(args)
    rng = np.random.default_rng(args.seed)

    truth = CoeffVec(rng.standard_normal((config.big_n + 1, 2)))
    x = np.linspace(-1.0, config.alpha, 4 * config.dim)
    clean = evaluate_coeffs(truth, config, x)
    observed = clean + args.noise * rng.standard_normal(clean.shape)

    match args.modes:
        case "cutoff":
            modes = None
        case "all":
            modes = config.dim
        case count:
            modes = int(count)
    report = reconstruct(x, observed, config, modes, args.noise, truth=truth)

    if args.format == "csv":
        recovered = evaluate_coeffs(report.coeffs, config, x)
        rows = [
            (float(x[k]), float(clean[k, 0]), float(clean[k, 1]),
             float(recovered[k, 0]), float(recovered[k, 1]))
            for k in range(x.size)
        ]
        text = _csv(("x", "truth_f1", "truth_f2", "recovered_f1", "recovered_f2"), rows)
    else:
        text = _json(args, "reconstruction", report.as_dict())

    _emit(args, text)
    return EXIT_OK


# -----------------------------------------------------------------------------
# PARSER
# -----------------------------------------------------------------------------


def _modes(value: str) -> str:
    if value not in ("all", "cutoff"):
        try:
            if int(value) < 1:
                raise ValueError
        except ValueError:
            raise argparse.ArgumentTypeError(f"--modes takes a positive integer, 'all' or 'cutoff', got {value!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=float, default=4.0, help="Weight parameter n (default: 4).")
    common.add_argument("--p", type=float, default=1.0, help="Weight parameter p, 0 < p < n (default: 1).")
    common.add_argument("--N", type=int, default=10, help="Band limit in coefficient index (default: 10).")
    common.add_argument("--alpha", type=float, default=0.3, help="Cap boundary in (-1, 1) (default: 0.3).")
    common.add_argument("--quad-order", type=int, default=None, dest="quad_order",
                        help="Fixed base quadrature order (default: automatic).")
    common.add_argument("--tol", type=float, default=1e-9, help="Residual tolerance (default: 1e-9).")
    common.add_argument("--format", choices=("json", "csv"), default=None,
                        help="Output format (default: csv for kernel-check, json otherwise).")
    common.add_argument("--out", default=None, help="Output path (default: stdout).")
    common.add_argument("--seed", type=int, default=0, help="Seed for random draws and noise.")
    common.add_argument("--workers", type=int, default=1, help="Threads for matrix assembly.")
    common.add_argument("--mutate", choices=MUTATIONS, default=None,
                        help="Break the commuting operator on purpose (negative control).")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v INFO, -vv DEBUG.")

    parser = argparse.ArgumentParser(
        prog="mvprolate",
        description="Matrix-valued time-and-band limiting: identity checks and prolate spectra.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", parents=[common], help="Run the identity suite.")
    verify.add_argument("--report-anomalies", action="store_true", dest="report_anomalies",
                        help="Add the norm-ratio table and the H_w prefactor comparison.")
    verify.set_defaults(func=cmd_verify)

    spectrum = sub.add_parser("spectrum", parents=[common], help="Prolate spectrum via B.")
    spectrum.add_argument("--eigenfunctions", default=None,
                          help="Also write every mode on a 201-point grid of [-1, alpha] as CSV.")
    spectrum.set_defaults(func=cmd_spectrum)

    kernel = sub.add_parser("kernel-check", parents=[common], help="Kernel identity on a grid.")
    kernel.add_argument("--grid", type=int, default=12, help="Grid points per axis (default: 12).")
    kernel.set_defaults(func=cmd_kernel_check, default_format="csv")

    rec = sub.add_parser("reconstruct", parents=[common], help="Noisy reconstruction demo.")
    rec.add_argument(
        "--modes",
        type=_modes,
        default="cutoff",
        help="Modes kept: integer, 'all', or 'cutoff' (s >= noise^2, the default).",
    )
    rec.add_argument("--noise", type=float, default=0.0, help="Noise standard deviation.")
    rec.set_defaults(func=cmd_reconstruct)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.format is None:
        args.format = getattr(args, "default_format", "json")

    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(
        stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s"
    )

    try:
        return args.func(args)
    except (ParameterError, DomainError) as e:
        print(f"mvprolate: invalid parameters: {e}", file=sys.stderr)
        return EXIT_PARAMS
    except OSError as e:
        print(f"mvprolate: IO error: {e}", file=sys.stderr)
        return EXIT_IO
    except MvProlateError as e:
        print(f"mvprolate: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAILED
