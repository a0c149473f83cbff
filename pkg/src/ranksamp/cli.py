"""Single command-line entry point: simulate, oracle, dataset, estimate, plan.

Every output file begins with a metadata record (seed, config hash, tool
version). Outputs carry no timestamps or timings, so a given seed + config
reproduces a file byte for byte regardless of worker count; timing goes to
stderr. Exit codes: 0 success, 1 runtime or I/O failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import contextlib
import hashlib
import json
import math
import os
import sys
from pathlib import Path

from . import __version__
from .core import BernoulliPopulation, DellClutterRanking
from .data import (
    ColumnMapping,
    Dataset,
    WBCD_RESPONSE_COLUMN,
    WBCD_SUCCESS_LABEL,
    load_csv,
    summary,
)
from .designs import read_sample_csv
from .estimate import estimate_proportion, stratum_estimates, wald_interval, z_quantile
from .mc import (
    DEFAULT_REPLICATIONS,
    SimulationConfig,
    metadata_line,
    run_sweep,
    stratum_means_mc,
    write_sweep_csv,
    write_sweep_json,
)
from .oracle import exact_efficiency, msrss_strata

TABLE1_GRID = {
    "p": (0.1, 0.25, 0.5, 0.75, 0.9),
    "m": (3, 4, 5),
    "r": (1, 2, 3, 4),
    "lam": (1.0,),
}
FIGURES_GRID = {
    "p": tuple(round(0.05 * k, 2) for k in range(1, 20)),
    "m": (3, 4, 5),
    "r": (1, 2, 3, 4),
    "lam": (0.7, 0.85, 1.0),
}


class UsageError(Exception):
    """Bad flags or grids: reported on stderr with exit code 2."""


def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get("RANKSAMP_WORKERS", "1")))
    except ValueError:
        return 1


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int.from_bytes(os.urandom(4), "big")


@contextlib.contextmanager
def _open_out(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _digest(payload: dict) -> str:
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf"
        return format(x, ".12g")
    return str(x)


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=None, help="RNG seed (default: generated and echoed)")
    sub.add_argument("--workers", type=int, default=_default_workers(),
                     help="worker processes (default: $RANKSAMP_WORKERS or 1)")
    sub.add_argument("-o", "--output", default=None, help="output path (default: stdout)")
    sub.add_argument("--format", choices=("csv", "json"), default=None,
                     help="output format (default: csv for tables, json for records)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ranksamp",
        description="Rank-based sampling designs for binary data: efficiency "
        "studies, exact oracle tables, dataset workflows, estimation, and "
        "sample-size planning.",
    )
    parser.add_argument("--version", action="version", version=f"ranksamp {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    sim = subs.add_parser("simulate", help="Monte Carlo efficiency sweep over a Bernoulli population")
    sim.add_argument("--p", type=float, nargs="+", help="population proportions")
    sim.add_argument("--m", type=int, nargs="+", help="set sizes")
    sim.add_argument("--r", type=int, nargs="+", help="stage counts")
    sim.add_argument("--lambda", type=float, nargs="+", dest="lam", default=None,
                     help="ranking correlations in [0, 1] (default: 1 = perfect)")
    sim.add_argument("--reps", type=int, default=DEFAULT_REPLICATIONS, help="replications per cell")
    sim.add_argument("--design", choices=("msrss", "rss"), default="msrss",
                     help="rss restricts the grid to r = 1")
    sim.add_argument("--table1", action="store_true",
                     help="preset: the benchmark PSSR grid (m 3-5, r 1-4, five p values, perfect ranking)")
    sim.add_argument("--figures", action="store_true",
                     help="preset: RE curves grid (p 0.05..0.95, m 3-5, r 1-4, three correlations)")
    _add_common(sim)
    sim.set_defaults(func=cmd_simulate)

    orc = subs.add_parser("oracle", help="exact efficiency table under perfect ranking")
    orc.add_argument("--p", type=float, nargs="+", required=True)
    orc.add_argument("--m", type=int, nargs="+", required=True)
    orc.add_argument("--r", type=int, nargs="+", required=True)
    orc.add_argument("--strata-out", default=None,
                     help="also write the exact stratum probabilities (CSV: p,m,r,stratum,prob)")
    _add_common(orc)
    orc.set_defaults(func=cmd_oracle)

    dat = subs.add_parser("dataset", help="covariate-ranked sweep over a CSV dataset")
    dat.add_argument("--data", required=True, help="dataset CSV path")
    dat.add_argument("--mapping", default=None,
                     help="key=value mapping file (response=..., success=..., failure=..., covariates=a,b,c)")
    dat.add_argument("--response-col", default=None, help=f"response column (default {WBCD_RESPONSE_COLUMN!r})")
    dat.add_argument("--success-label", default=None, help=f"success label (default {WBCD_SUCCESS_LABEL!r})")
    dat.add_argument("--failure-label", default=None)
    dat.add_argument("--covariate-cols", nargs="+", default=None,
                     help="covariate columns in alias order (default: every non-response column)")
    dat.add_argument("--covariate", nargs="+", required=True,
                     help="ranking covariates to sweep (names or Y1..Yk aliases)")
    dat.add_argument("--m", type=int, nargs="+", required=True)
    dat.add_argument("--r", type=int, nargs="+", required=True)
    dat.add_argument("--reps", type=int, default=DEFAULT_REPLICATIONS)
    dat.add_argument("--missing", choices=("drop", "error"), default="drop")
    dat.add_argument("--summary-out", default=None,
                     help="dataset summary JSON path (default: alongside --output)")
    _add_common(dat)
    dat.set_defaults(func=cmd_dataset)

    est = subs.add_parser("estimate", help="proportion estimate and Wald interval from a sample CSV")
    est.add_argument("sample", help="sample CSV (stage_r,rank_i,cycle_j,value)")
    est.add_argument("--level", type=float, default=0.95)
    est.add_argument("--fallback-variance", action="store_true",
                     help="allow n = 1 samples via the conservative p(1-p)/(nm) variance")
    _add_common(est)
    est.set_defaults(func=cmd_estimate)

    pln = subs.add_parser("plan", help="smallest cycle counts meeting a target interval half-width")
    pln.add_argument("--half-width", type=float, required=True)
    pln.add_argument("--level", type=float, default=0.95)
    pln.add_argument("--p", type=float, required=True, help="anticipated population proportion")
    pln.add_argument("--m", type=int, required=True)
    pln.add_argument("--r", type=int, required=True)
    pln.add_argument("--lambda", type=float, default=1.0, dest="lam",
                     help="ranking correlation; below 1 the design variance is Monte Carlo calibrated")
    pln.add_argument("--reps", type=int, default=DEFAULT_REPLICATIONS,
                     help="calibration replications when --lambda < 1")
    _add_common(pln)
    pln.set_defaults(func=cmd_plan)

    return parser


# --- simulate ----------------------------------------------------------------


def cmd_simulate(args) -> int:
    if args.table1 and args.figures:
        raise UsageError("choose at most one preset")
    preset = TABLE1_GRID if args.table1 else FIGURES_GRID if args.figures else None
    if preset is not None:
        if args.p or args.m or args.r or args.lam:
            raise UsageError("presets fix the grid; do not combine with --p/--m/--r/--lambda")
        p_values, m_values, r_values, lam_values = preset["p"], preset["m"], preset["r"], preset["lam"]
    else:
        if not (args.p and args.m and args.r):
            raise UsageError("--p, --m and --r are required (or use --table1 / --figures)")
        p_values, m_values, r_values = tuple(args.p), tuple(args.m), tuple(args.r)
        lam_values = tuple(args.lam) if args.lam else (1.0,)
    for p in p_values:
        if not 0.0 <= p <= 1.0:
            raise UsageError(f"p must lie in [0, 1], got {p}")
    for lam in lam_values:
        if not 0.0 <= lam <= 1.0:
            raise UsageError(f"lambda must lie in [0, 1], got {lam}")
    if min(m_values) < 1 or min(r_values) < 1:
        raise UsageError("set sizes and stage counts must be >= 1")
    if args.design == "rss" and set(r_values) != {1}:
        raise UsageError("--design rss requires r = 1")
    if args.reps < 2:
        raise UsageError("--reps must be >= 2")

    seed = _resolve_seed(args)
    config = SimulationConfig(
        m_values=m_values,
        r_values=r_values,
        p_values=p_values,
        lambda_values=lam_values,
        replications=args.reps,
        seed=seed,
        workers=max(1, args.workers),
    )
    result = run_sweep(config)
    _report_failures(result)
    with _open_out(args.output) as fh:
        if (args.format or "csv") == "json":
            write_sweep_json(result, fh)
        else:
            write_sweep_csv(result, fh)
    elapsed = sum(row.elapsed for row in result.rows)
    print(f"simulate: {len(result.rows)} cells, seed={seed}, {elapsed:.1f}s simulation time",
          file=sys.stderr)
    return 0 if any(row.report is not None for row in result.rows) else 1


def _report_failures(result) -> None:
    for row in result.rows:
        if row.error is not None:
            pt = row.point
            print(f"warning: cell (p={pt.p}, m={pt.m}, r={pt.r}, lambda={pt.lam}, "
                  f"covariate={pt.covariate}) failed: {row.error}", file=sys.stderr)


# --- oracle ------------------------------------------------------------------


def cmd_oracle(args) -> int:
    for p in args.p:
        if not 0.0 <= p <= 1.0:
            raise UsageError(f"p must lie in [0, 1], got {p}")
    if min(args.m) < 1 or min(args.r) < 1:
        raise UsageError("set sizes and stage counts must be >= 1")
    seed = _resolve_seed(args)
    digest = _digest({"cmd": "oracle", "p": args.p, "m": args.m, "r": args.r})
    rows = []
    for p in args.p:
        for m in args.m:
            for r in args.r:
                report = exact_efficiency(p, m, r)
                strata = msrss_strata(p, m, r)
                if report.degenerate:
                    print(f"warning: degenerate cell p={p} (both variances are zero)",
                          file=sys.stderr)
                rows.append((p, m, r, report, strata))
    with _open_out(args.output) as fh:
        if (args.format or "csv") == "json":
            payload = {
                "meta": {"seed": seed, "config": digest, "version": __version__},
                "rows": [
                    {"p": p, "m": m, "r": r, **rep.to_json_dict(),
                     "degenerate": rep.degenerate, "strata": strata.as_floats()}
                    for p, m, r, rep, strata in rows
                ],
            }
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        else:
            fh.write(metadata_line(seed, digest) + "\n")
            fh.write("p,m,r,var_srs,var_msrss,re,pssr\n")
            for p, m, r, rep, _ in rows:
                fh.write(f"{_fmt(p)},{m},{r},{_fmt(rep.var_srs)},{_fmt(rep.var_design)},"
                         f"{_fmt(rep.re)},{_fmt(rep.pssr)}\n")
    if args.strata_out:
        with open(args.strata_out, "w") as fh:
            fh.write(metadata_line(seed, digest) + "\n")
            fh.write("p,m,r,stratum,prob\n")
            for p, m, r, _, strata in rows:
                for i, q in enumerate(strata.as_floats(), start=1):
                    fh.write(f"{_fmt(p)},{m},{r},{i},{_fmt(q)}\n")
    return 0


# --- dataset -----------------------------------------------------------------


def _read_mapping_file(path: str) -> dict:
    out = {}
    for line_no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{line_no}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _dataset_mapping(args) -> tuple[str, str, str, tuple[str, ...] | None]:
    spec = _read_mapping_file(args.mapping) if args.mapping else {}
    response = args.response_col or spec.get("response", WBCD_RESPONSE_COLUMN)
    success = args.success_label or spec.get("success", WBCD_SUCCESS_LABEL)
    failure = args.failure_label or spec.get("failure") or None
    covariates: tuple[str, ...] | None
    if args.covariate_cols:
        covariates = tuple(args.covariate_cols)
    elif "covariates" in spec:
        covariates = tuple(c.strip() for c in spec["covariates"].split(",") if c.strip())
    else:
        covariates = None
    return response, success, failure, covariates


def cmd_dataset(args) -> int:
    if min(args.m) < 1 or min(args.r) < 1:
        raise UsageError("set sizes and stage counts must be >= 1")
    if args.reps < 2:
        raise UsageError("--reps must be >= 2")
    response, success, failure, covariate_cols = _dataset_mapping(args)
    if covariate_cols is None:
        import csv as _csv

        with open(args.data, newline="") as fh:
            header = next(_csv.reader(fh))
        covariate_cols = tuple(c for c in header if c != response)
    ds = load_csv(
        args.data,
        ColumnMapping(response=response, success_label=success,
                      covariates=covariate_cols, failure_label=failure),
        missing_policy=args.missing,
    )
    ranking_columns = tuple(ds.alias(c) for c in args.covariate)
    seed = _resolve_seed(args)
    config = SimulationConfig(
        m_values=tuple(args.m),
        r_values=tuple(args.r),
        dataset=ds.population(),
        covariates=ranking_columns,
        replications=args.reps,
        seed=seed,
        workers=max(1, args.workers),
    )
    result = run_sweep(config)
    _report_failures(result)
    with _open_out(args.output) as fh:
        if (args.format or "csv") == "json":
            write_sweep_json(result, fh)
        else:
            write_sweep_csv(result, fh)
    summary_path = args.summary_out
    if summary_path is None and args.output not in (None, "-"):
        summary_path = str(Path(args.output).with_suffix(".summary.json"))
    if summary_path:
        with open(summary_path, "w") as fh:
            payload = {
                "meta": {"seed": seed, "config": result.config_digest, "version": __version__},
                **summary(ds, ranking_columns),
            }
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    print(f"dataset: n_rows={ds.n_rows} p={ds.response.mean():.4f} "
          f"dropped={ds.dropped_rows} cells={len(result.rows)} seed={seed}", file=sys.stderr)
    return 0 if any(row.report is not None for row in result.rows) else 1


# --- estimate ----------------------------------------------------------------


def cmd_estimate(args) -> int:
    if not 0.0 < args.level < 1.0:
        raise UsageError(f"confidence level must lie in (0, 1), got {args.level}")
    sample = read_sample_csv(args.sample)
    p_hat = estimate_proportion(sample)
    lo, hi = wald_interval(sample, level=args.level, fallback_variance=args.fallback_variance)
    seed = _resolve_seed(args)
    digest = _digest({"cmd": "estimate", "sample": str(args.sample), "level": args.level,
                      "fallback": bool(args.fallback_variance)})
    d = sample.design
    payload = {
        "meta": {"seed": seed, "config": digest, "version": __version__},
        "p_hat": p_hat,
        "interval": [lo, hi],
        "level": args.level,
        "design": {"kind": d.kind, "m": d.m, "n": d.n, "r": d.r},
        "stratum_estimates": [float(v) for v in stratum_estimates(sample)],
    }
    with _open_out(args.output) as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    return 0


# --- plan --------------------------------------------------------------------


def cmd_plan(args) -> int:
    if args.half_width <= 0:
        raise UsageError("--half-width must be positive")
    if not 0.0 < args.p < 1.0:
        raise UsageError("--p must lie strictly in (0, 1) for planning")
    if not 0.0 <= args.lam <= 1.0:
        raise UsageError("--lambda must lie in [0, 1]")
    if not 0.0 < args.level < 1.0:
        raise UsageError("confidence level must lie in (0, 1)")
    if args.m < 1 or args.r < 1:
        raise UsageError("set size and stage count must be >= 1")
    seed = _resolve_seed(args)
    p, m, r = args.p, args.m, args.r
    z = z_quantile(args.level)
    if args.lam == 1.0:
        probs = msrss_strata(p, m, r).as_floats()
        calibration = "exact"
    else:
        pop = BernoulliPopulation(p)
        probs = stratum_means_mc(pop, DellClutterRanking(args.lam), m, r,
                                 args.reps, seed).tolist()
        calibration = f"monte-carlo ({args.reps} replications)"
    stratum_var = sum(q * (1.0 - q) for q in probs)
    # smallest n with z * sqrt(var(n)) <= half-width, var(n) = sum/(n m^2)
    n_design = max(1, math.ceil(z * z * stratum_var / (m * m * args.half_width**2)))
    srs_total = max(1, math.ceil(z * z * p * (1.0 - p) / args.half_width**2))
    n_srs = max(1, math.ceil(srs_total / m))
    pssr = (1.0 - stratum_var / (m * p * (1.0 - p))) * 100.0
    digest = _digest({"cmd": "plan", "half_width": args.half_width, "level": args.level,
                      "p": p, "m": m, "r": r, "lambda": args.lam})
    payload = {
        "meta": {"seed": seed, "config": digest, "version": __version__},
        "half_width": args.half_width,
        "level": args.level,
        "p": p,
        "m": m,
        "r": r,
        "lambda": args.lam,
        "calibration": calibration,
        "msrss": {"n": n_design, "N": n_design * m,
                  "achieved_half_width": z * math.sqrt(stratum_var / (n_design * m * m))},
        "srs": {"n": n_srs, "N": srs_total,
                "achieved_half_width": z * math.sqrt(p * (1.0 - p) / srs_total)},
        "pssr": pssr,
    }
    with _open_out(args.output) as fh:
        if (args.format or "json") == "json":
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        else:
            fh.write(metadata_line(seed, digest) + "\n")
            fh.write("p,m,r,lambda,n_msrss,N_msrss,n_srs,N_srs,pssr\n")
            fh.write(f"{_fmt(p)},{m},{r},{_fmt(args.lam)},{n_design},{n_design * m},"
                     f"{n_srs},{srs_total},{_fmt(pssr)}\n")
    return 0


# --- entry -------------------------------------------------------------------


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
