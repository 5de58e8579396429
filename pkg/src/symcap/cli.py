"""Command-line interface.

Subcommands wire body specs, seeds, and sample budgets to the engines and
emit structured reports (JSON canonical, CSV as a flattened projection).
Exit codes: 0 success, 1 usage or parse error, 2 an uncertified
computation was requested without --allow-heuristic, 3 acceptance-suite
failure.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
import time

import numpy as np

from . import __version__
from . import ensembles as ens
from .acceptance import SUITES, run_suite, spec_for
from .alpha import alpha, ehz_sandwich
from .bodies import BodyError, FamilySpec, make_body, parse_body
from .ensembles import EnsembleConfig, HeuristicAlphaError
from .functionals import (
    circumradius,
    contact_point,
    inradius,
    scaling_summary_row,
    section_mean_width,
)
from .report import ReportDocument, to_native
from .rotations import RngStream, haar_rotation

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNCERTIFIED = 2
EXIT_SUITE_FAILED = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="symcap", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, body=True):
        if body:
            p.add_argument("--body", required=True,
                           help="body spec, e.g. cube:8, lp:8:1.5, ellipsoid:1,4")
        p.add_argument("--seed", type=int, default=None,
                       help="base seed (default: SYMCAP_SEED or 1)")
        p.add_argument("--samples", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--format", choices=("json", "csv"), default=None)
        p.add_argument("--out", default=None, help="write the report here")
        p.add_argument("--config", default=None,
                       help="flat key=value file with defaults (flags win)")
        p.add_argument("--allow-heuristic", action="store_true",
                       help="accept lower-bound alpha routes")

    p_alpha = sub.add_parser("alpha", help="alpha and its capacity interval")
    common(p_alpha)
    p_alpha.add_argument("--rotation-seed", type=int, default=None,
                         help="evaluate alpha(OK) at one Haar rotation")

    p_expect = sub.add_parser("expect", help="rotation-ensemble moment estimates")
    common(p_expect)
    p_expect.add_argument("--p", type=float, default=None, help="moment order")
    p_expect.add_argument("--bootstrap", action="store_true",
                          help="emit a bootstrap SE cross-check")

    p_table = sub.add_parser("table1", help="per-family scaling summary rows")
    common(p_table, body=False)
    p_table.add_argument("--dims", default="8,16,32,64",
                         help="comma list of even dimensions")
    p_table.add_argument("--families", default="cube,cross,ellipsoid,box")

    p_verify = sub.add_parser("verify", help="run a registered acceptance suite")
    p_verify.add_argument("suite", choices=sorted(SUITES))
    common(p_verify, body=False)

    p_chevet = sub.add_parser("chevet", help="Gaussian operator-norm diagnostic")
    common(p_chevet)

    p_sweep = sub.add_parser("sweep", help="ball-product capacity growth sweep")
    common(p_sweep, body=False)
    p_sweep.add_argument("--lambdas", default="1,4,16,64")
    p_sweep.add_argument("--dim", type=int, default=8)

    return parser


def _load_config(path: str | None) -> dict:
    conf: dict = {}
    if not path:
        return conf
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise _UsageError(f"bad config line: {line!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            conf[key.replace("-", "_")] = val
    return conf


def _resolve(args, conf: dict, key: str, builtin, cast):
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if key in conf:
        return cast(conf[key])
    if key == "seed":
        env = os.environ.get("SYMCAP_SEED")
        if env is not None:
            return int(env)
    return builtin


def _emit(doc: ReportDocument, fmt: str, out: str | None) -> None:
    text = doc.to_json() if fmt == "json" else doc.to_csv()
    if out:
        with open(out, "w") as fh:
            fh.write(text + ("\n" if not text.endswith("\n") else ""))
    else:
        sys.stdout.write(text + ("\n" if not text.endswith("\n") else ""))


def _family_specs(families: str, dims: str):
    for fam in families.split(","):
        fam = fam.strip()
        for d in dims.split(","):
            yield fam, spec_for(fam, int(d))


# ---------------------------------------------------------------------------
# commands


def cmd_alpha(args, conf) -> int:
    seed = _resolve(args, conf, "seed", 1, int)
    spec = parse_body(args.body)
    body = make_body(spec)
    rotation = None
    if args.rotation_seed is not None:
        rotation = haar_rotation(RngStream(args.rotation_seed), spec.dim)
    t0 = time.perf_counter()
    interval = ehz_sandwich(body, rotation)
    if not interval.certified and not args.allow_heuristic:
        sys.stderr.write("alpha is a lower bound for this body; the capacity "
                         "interval is uncertified (pass --allow-heuristic)\n")
        return EXIT_UNCERTIFIED
    doc = ReportDocument(
        command="alpha",
        body=spec.to_dict(),
        seed=seed,
        results={"alpha": interval.alpha_result.to_dict(),
                 "capacity_interval": {"lo": interval.lo, "hi": interval.hi,
                                       "certified": interval.certified},
                 "rotation_seed": args.rotation_seed},
        timing_ms=int(1000 * (time.perf_counter() - t0)),
        version=__version__,
    )
    _emit(doc, _resolve(args, conf, "format", "json", str), args.out)
    return EXIT_OK


def cmd_expect(args, conf) -> int:
    seed = _resolve(args, conf, "seed", 1, int)
    n = _resolve(args, conf, "samples", 2000, int)
    workers = _resolve(args, conf, "workers", 1, int)
    p = _resolve(args, conf, "p", 1.0, float)
    spec = parse_body(args.body)
    cfg = EnsembleConfig(body=spec, n_samples=n, seed=seed, p=p, workers=workers)
    t0 = time.perf_counter()
    try:
        moment, samples = ens.expect_alpha_moment(cfg, args.allow_heuristic,
                                                  return_samples=True)
        sandwich = None
        if p > 0:
            lo = ens.moment_root(1.0 / samples, p, seed)
            sandwich = {"lo": lo, "hi": lo.scaled(4.0)}
    except HeuristicAlphaError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_UNCERTIFIED
    body = make_body(spec)
    results = {"alpha_moment": moment, "p": p}
    if sandwich is not None:
        results["capacity_sandwich"] = sandwich
    if args.bootstrap:
        results["bootstrap_se"] = ens.bootstrap_se(samples, p, RngStream(seed, 999))
    if body.quad_form() is not None and spec.axes is not None:
        results["capacity_exact_ensemble"] = ens.ellipsoid_capacity_expectation(
            spec.axes, p, n, RngStream(seed, 101), workers)
    try:
        cp = contact_point(body)
        v_unit = cp.v / np.linalg.norm(cp.v)
        msec = section_mean_width(body.polar(), v_unit, max(20000, n),
                                  RngStream(seed, 103), workers)
        r = inradius(body)
        results["anchor"] = {
            "inradius": r,
            "section_mean_width": msec,
            "ratio": r / msec.estimate,
            "ratio_std_error": r * msec.std_error / msec.estimate**2,
            "alpha_anchor": msec.scaled(circumradius(body.polar())),
        }
    except Exception:
        results["anchor"] = None
    doc = ReportDocument(
        command="expect", body=spec.to_dict(), seed=seed, n_samples=n,
        workers=workers, results=results,
        timing_ms=int(1000 * (time.perf_counter() - t0)), version=__version__,
    )
    _emit(doc, _resolve(args, conf, "format", "json", str), args.out)
    return EXIT_OK


def cmd_table1(args, conf) -> int:
    seed = _resolve(args, conf, "seed", 1, int)
    n = _resolve(args, conf, "samples", 20000, int)
    workers = _resolve(args, conf, "workers", 1, int)
    t0 = time.perf_counter()
    rows = []
    csv_rows = []
    try:
        for k, (fam, spec) in enumerate(_family_specs(args.families, args.dims)):
            row = scaling_summary_row(spec, n, RngStream(seed, 1000 + k), workers)
            rows.append(row)
            for qty in ("r_sq", "ratio", "volradius_sq"):
                csv_rows.append({
                    "family": row["family"], "dim": row["dim"], "quantity": qty,
                    "value": row[qty],
                    "std_error": row["ratio_std_error"] if qty == "ratio" else 0.0,
                    "normalized": row["normalized"][qty],
                })
    except (ValueError, BodyError) as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    doc = ReportDocument(
        command="table1", seed=seed, n_samples=n, workers=workers,
        results={"rows": rows},
        timing_ms=int(1000 * (time.perf_counter() - t0)), version=__version__,
    )
    doc.csv_rows = csv_rows
    _emit(doc, _resolve(args, conf, "format", "json", str), args.out)
    return EXIT_OK


def cmd_verify(args, conf) -> int:
    seed = _resolve(args, conf, "seed", 1, int)
    t0 = time.perf_counter()
    res = run_suite(args.suite, seed)
    for c in res["checks"]:
        status = "PASS" if c["passed"] else "FAIL"
        sys.stderr.write(f"[{status}] {res['suite']}: {c['name']}\n")
    doc = ReportDocument(
        command="verify", seed=seed, results=res,
        timing_ms=int(1000 * (time.perf_counter() - t0)), version=__version__,
    )
    _emit(doc, _resolve(args, conf, "format", "json", str), args.out)
    return EXIT_OK if res["passed"] else EXIT_SUITE_FAILED


def cmd_chevet(args, conf) -> int:
    seed = _resolve(args, conf, "seed", 1, int)
    n = _resolve(args, conf, "samples", 200, int)
    spec = parse_body(args.body)
    body = make_body(spec)
    t0 = time.perf_counter()
    res = ens.chevet_diagnostic(body, n, RngStream(seed, 77))
    doc = ReportDocument(
        command="chevet", body=spec.to_dict(), seed=seed, n_samples=n,
        results=res, timing_ms=int(1000 * (time.perf_counter() - t0)),
        version=__version__,
    )
    _emit(doc, _resolve(args, conf, "format", "json", str), args.out)
    return EXIT_OK


def cmd_sweep(args, conf) -> int:
    seed = _resolve(args, conf, "seed", 1, int)
    n = _resolve(args, conf, "samples", 2000, int)
    workers = _resolve(args, conf, "workers", 1, int)
    lambdas = [float(x) for x in args.lambdas.split(",")]
    t0 = time.perf_counter()
    rows = ens.ball_product_growth_sweep(lambdas, args.dim, n,
                                         RngStream(seed, 88), workers)
    csv_rows = [{"lam": r["lam"], "x": r["lam"],
                 "y": r["capacity_lower_bound"].estimate,
                 "y_err": r["capacity_lower_bound"].std_error,
                 "anchor_ratio": r["anchor_ratio"]} for r in rows]
    doc = ReportDocument(
        command="sweep", seed=seed, n_samples=n, workers=workers,
        results={"rows": rows, "dim": args.dim},
        timing_ms=int(1000 * (time.perf_counter() - t0)), version=__version__,
    )
    doc.csv_rows = csv_rows
    _emit(doc, _resolve(args, conf, "format", "json", str), args.out)
    return EXIT_OK


COMMANDS = {
    "alpha": cmd_alpha,
    "expect": cmd_expect,
    "table1": cmd_table1,
    "verify": cmd_verify,
    "chevet": cmd_chevet,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        conf = _load_config(getattr(args, "config", None))
        return COMMANDS[args.command](args, conf)
    except _UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except (BodyError, ValueError, OSError, KeyError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
