"""Command-line interface: ``khinlab <subcommand> ...``.

Every subcommand writes one JSON document (``"schema": 1``) to stdout or
``--out``; ``--format csv`` writes a table instead.  Exit status is 0 when
every produced report passes, 1 on a failed check, 2 for an unknown lemma
name and 3 when a check is numerically indeterminate.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from . import __version__, oscquad, polydensity, specfun, sphere, verify
from .errors import KhinlabError
from .report import SCHEMA_VERSION, reports_to_csv

EXIT_OK, EXIT_FAIL, EXIT_UNKNOWN, EXIT_INDETERMINATE = 0, 1, 2, 3


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _seed(args):
    if args.seed is not None:
        return args.seed
    return sphere.default_seed()


def _threads(args):
    return args.threads if args.threads is not None else sphere.default_threads()


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write output to this file instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, default=None, help="RNG seed (overrides KHINLAB_SEED)")
    common.add_argument("--threads", type=int, default=None, help="worker threads (overrides KHINLAB_THREADS)")
    common.add_argument("--deterministic", action="store_true", help="zero out timings for byte-stable output")

    parser = argparse.ArgumentParser(prog="khinlab", description="Negative moments of weighted sums of uniforms.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", parents=[common], help="constants attached to a moment order")
    p.add_argument("--p", type=float, required=True)

    p = sub.add_parser("moment", parents=[common], help="E|sum a_k U_k|^{-p}")
    p.add_argument("--weights", type=_floats, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--method", choices=("exact", "fourier", "mc"), default="exact")
    p.add_argument("--samples", type=int, default=1_000_000, help="Monte Carlo sample size")

    p = sub.add_parser("slice-volume", parents=[common], help="central cube section orthogonal to a")
    p.add_argument("--weights", type=_floats, required=True)

    p = sub.add_parser("psi", parents=[common], help="Psi_p(s) and the ball-integral bound")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--p", type=float, required=True)

    p = sub.add_parser("verify", parents=[common], help="run lemma checks")
    p.add_argument("lemma", help="lemma name or 'all': " + ", ".join(sorted(verify.CHECKS)))

    p = sub.add_parser("extremize", parents=[common], help="search for maximising weights")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--restarts", type=int, default=20)

    p = sub.add_parser("scan", parents=[common], help="random scan of the main inequality")
    p.add_argument("--config", required=True, help="JSON file: count, n_max, n_min, p_grid, seed")
    return parser


def _values_csv(d):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    flat = {k: v for k, v in d.items() if not isinstance(v, (dict, list))}
    w.writerow(flat.keys())
    w.writerow(flat.values())
    return buf.getvalue()


def _table_csv(rows):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _emit(args, text):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_value(args, payload):
    payload = {"schema": SCHEMA_VERSION, "command": args.command, **payload}
    if args.format == "csv":
        _emit(args, _values_csv(payload))
    else:
        _emit(args, json.dumps(payload, sort_keys=True) + "\n")
    return EXIT_OK


def _emit_reports(args, reports, extra=None):
    if args.format == "csv":
        _emit(args, reports_to_csv(reports))
    else:
        doc = {
            "schema": SCHEMA_VERSION,
            "command": args.command,
            "reports": [r.to_dict(args.deterministic) for r in reports],
            **(extra or {}),
        }
        _emit(args, json.dumps(doc, sort_keys=True) + "\n")
    if any(r.status == "fail" for r in reports):
        return EXIT_FAIL
    if any(r.status == "indeterminate" for r in reports):
        return EXIT_INDETERMINATE
    return EXIT_OK


def cmd_constants(args):
    return _emit_value(args, specfun.constants(args.p).to_dict())


def cmd_moment(args):
    a, p = args.weights, args.p
    out = {"weights": a, "p": p, "method": args.method}
    if args.method == "exact":
        out["value"] = polydensity.exact_neg_moment(a, p)
    elif args.method == "fourier":
        out["value"] = oscquad.fourier_neg_moment(a, p)
    else:
        # the sphere moment equals (1 - p) times the uniform one
        est = sphere.rao_blackwell_moment(a, p, args.samples, sphere.SphereSampler(_seed(args)), _threads(args))
        out.update(value=est.mean / (1.0 - p), stderr=est.stderr / (1.0 - p), samples=est.n, seed=_seed(args))
    return _emit_value(args, out)


def cmd_slice_volume(args):
    return _emit_value(args, {"weights": args.weights, "n": len(args.weights),
                              "volume": polydensity.slice_volume(args.weights)})


def cmd_psi(args):
    v = oscquad.psi(args.s, args.p)
    rhs = oscquad.ball_integral_rhs(args.p)
    return _emit_value(args, {"s": v.s, "p": v.p, "psi": v.value, "tail_bound": v.tail_bound,
                              "ball_rhs": rhs, "margin": 1.0 - v.value / rhs})


def cmd_verify(args):
    names = sorted(verify.CHECKS) if args.lemma == "all" else [args.lemma]
    unknown = [n for n in names if n not in verify.CHECKS]
    if unknown:
        sys.stderr.write(f"unknown lemma {args.lemma!r}; choose 'all' or one of: {', '.join(sorted(verify.CHECKS))}\n")
        return EXIT_UNKNOWN
    opts = verify.CheckOptions(seed=_seed(args))
    return _emit_reports(args, verify.run_checks(names, opts, _threads(args)))


def cmd_extremize(args):
    return _emit_reports(args, [verify.extremize_report(args.n, args.p, args.restarts, _seed(args))])


def cmd_scan(args):
    with open(args.config) as fh:
        cfg = json.load(fh)
    grid = cfg.get("p_grid", "default")
    grid = specfun.DEFAULT_P_GRID if grid == "default" else tuple(float(p) for p in grid)
    seed = cfg.get("seed", _seed(args))
    rep, table = verify.main_inequality_scan(int(cfg.get("count", 100)), int(cfg.get("n_max", 10)), grid, seed,
                                             int(cfg.get("n_min", 2)))
    if args.format == "csv":
        _emit(args, _table_csv(table))
        return EXIT_OK if rep.passed else EXIT_FAIL
    return _emit_reports(args, [rep], {"table": table})


COMMANDS = {
    "constants": cmd_constants,
    "moment": cmd_moment,
    "slice-volume": cmd_slice_volume,
    "psi": cmd_psi,
    "verify": cmd_verify,
    "extremize": cmd_extremize,
    "scan": cmd_scan,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        os.environ["KHINLAB_THREADS"] = str(args.threads)
    try:
        return COMMANDS[args.command](args)
    except (KhinlabError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"khinlab: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
