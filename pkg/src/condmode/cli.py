"""Command line interface.

    condmode density  --curves C.csv --responses R.csv --query Q.csv --out DIR
    condmode predict  --series S.csv --segments N --characteristic endpoint --out DIR [--cv]
    condmode cv       --curves C.csv --responses R.csv --out DIR
    condmode simulate --n-grid 100,200,400 --reps 30 --seed 7 --out DIR

Option values are resolved as: command-line flag, then ``--config`` JSON file,
then built-in default. Exit codes: 0 success (warnings are reported in the
output files), 2 bad input data, 3 bad configuration.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from condmode import io
from condmode.bandwidth import BandwidthGrid, cv_select, knn_bandwidth
from condmode.core import ConfigError, DataError, FunctionalSample, ModeSearchInterval, require_valid
from condmode.estimator import EstimatorConfig, mode_estimate
from condmode.kernels import get_kernel, kernel_names
from condmode.semimetrics import SemiMetricSpec, fit_pca
from condmode.simulate import GeneratorSpec, RateStudyConfig, rate_study
from condmode.timeseries import PathSlicingConfig, build_pairs, predict_next, slice_path

log = logging.getLogger("condmode")

EXIT_DATA = 2
EXIT_CONFIG = 3

DEFAULTS: dict[str, Any] = {
    "seed": 0,
    "workers": 1,
    "out": ".",
    "semimetric": "l2",
    "q": 1,
    "k_kernel": "quadshift",
    "h_kernel": "gaussian",
    "hk": None,
    "knn": None,
    "hh": None,
    "lower": None,
    "upper": None,
    "grid_points": 201,
    "query_id": None,
    "segments": None,
    "characteristic": "endpoint",
    "center": False,
    "cv": False,
    "hk_candidates": None,
    "knn_candidates": None,
    "hh_candidates": None,
    # simulate
    "n_grid": "100,200,400,800,1600",
    "reps": 100,
    "p": 2.0,
    "j": 2,
    "b1": 1.0,
    "b2": 2.0,
    "knn_fraction": 0.10,
    "hh_scale": 1.06,
    "hh_exponent": -1 / 7,
    "driver": "ar1",
    "rho": 0.5,
    "sigma": 1.0,
    "noise": "gaussian",
    "link": "identity",
    "lag_weight": 0.25,
    "curve_points": 50,
}


class UsageError(ConfigError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors are configuration errors
        raise UsageError(message)


def _estimator_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("estimator")
    g.add_argument("--semimetric", choices=["l2", "deriv", "pca"])
    g.add_argument("--q", type=int, help="derivative order or number of PCA components")
    g.add_argument("--k-kernel", choices=kernel_names("K"))
    g.add_argument("--h-kernel", choices=kernel_names("H"))
    g.add_argument("--hk", type=float, help="curve bandwidth h_k")
    g.add_argument("--knn", type=int, help="use the kNN radius of this rank as h_k")
    g.add_argument("--hh", type=float, help="response bandwidth h_h")
    g.add_argument("--lower", type=float, help="mode search interval lower bound")
    g.add_argument("--upper", type=float, help="mode search interval upper bound")
    g.add_argument("--grid-points", type=int, help="points of the mode search grid")


def _cv_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("cross-validation")
    g.add_argument("--hk-candidates", help="comma-separated h_k candidates")
    g.add_argument("--knn-candidates", help="comma-separated kNN rank candidates")
    g.add_argument("--hh-candidates", help="comma-separated h_h candidates")


def build_parser() -> argparse.ArgumentParser:
    shared = _Parser(add_help=False)
    shared.add_argument("--config", help="JSON file of option defaults")
    shared.add_argument("--seed", type=int)
    shared.add_argument("--workers", type=int)
    shared.add_argument("--out", help="output directory")
    shared.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(
        prog="condmode", description="Kernel conditional density and mode estimation for functional data."
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("density", parents=[shared], help="conditional density at a query curve")
    d.add_argument("--curves", required=True)
    d.add_argument("--responses", required=True)
    d.add_argument("--query", required=True, help="curve CSV holding the query curve")
    d.add_argument("--query-id", help="series_id of the query when the file holds several")
    _estimator_flags(d)

    pr = sub.add_parser("predict", parents=[shared], help="predict the next segment characteristic")
    pr.add_argument("--series", required=True, help="time,value CSV")
    pr.add_argument("--segments", type=int, help="number N of segments")
    pr.add_argument("--characteristic", choices=["endpoint", "mean", "max", "integral"])
    pr.add_argument("--center", action="store_true", default=None, help="mean-center segments")
    pr.add_argument("--cv", action="store_true", default=None, help="choose (h_k, h_h) by leave-one-out")
    _estimator_flags(pr)
    _cv_flags(pr)

    c = sub.add_parser("cv", parents=[shared], help="leave-one-out bandwidth selection")
    c.add_argument("--curves", required=True)
    c.add_argument("--responses", required=True)
    _estimator_flags(c)
    _cv_flags(c)

    s = sub.add_parser("simulate", parents=[shared], help="Monte Carlo rate study")
    s.add_argument("--n-grid", help="comma-separated increasing sample sizes")
    s.add_argument("--reps", type=int)
    s.add_argument("--p", type=float)
    s.add_argument("--j", type=int)
    s.add_argument("--b1", type=float)
    s.add_argument("--b2", type=float)
    s.add_argument("--knn-fraction", type=float)
    s.add_argument("--hh-scale", type=float)
    s.add_argument("--hh-exponent", type=float)
    s.add_argument("--grid-points", type=int)
    s.add_argument("--semimetric", choices=["l2", "deriv"])
    s.add_argument("--q", type=int)
    s.add_argument("--driver", choices=["ar1", "expar", "arch1"])
    s.add_argument("--rho", type=float)
    s.add_argument("--sigma", type=float)
    s.add_argument("--noise", choices=["gaussian", "laplace"])
    s.add_argument("--link", choices=["identity", "sin", "cubic"])
    s.add_argument("--lag-weight", type=float)
    s.add_argument("--curve-points", type=int)
    return parser


class Options:
    """Flag > config file > default lookup."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config: dict[str, Any] = {}
        if args.config:
            try:
                with open(args.config) as fh:
                    cfg = json.load(fh)
            except OSError as exc:
                raise ConfigError(f"cannot read config {args.config}: {exc.strerror}") from None
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{args.config}:{exc.lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(cfg, dict):
                raise ConfigError(f"{args.config}: expected a JSON object")
            cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
            unknown = sorted(k for k in cfg if k not in DEFAULTS)
            if unknown:
                raise ConfigError(f"{args.config}: unknown option(s) {', '.join(unknown)}")
            self.config = cfg

    def __getattr__(self, name: str) -> Any:
        value = getattr(self.args, name, None)
        if value is not None:
            return value
        if name in self.config:
            return self.config[name]
        return DEFAULTS[name]


def _floats(text: Any, what: str) -> list[float]:
    if isinstance(text, (list, tuple)):
        items = list(text)
    else:
        items = [s for s in str(text).split(",") if s.strip()]
    try:
        return [float(s) for s in items]
    except ValueError:
        raise ConfigError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def _ints(text: Any, what: str) -> list[int]:
    vals = _floats(text, what)
    if any(v != int(v) for v in vals):
        raise ConfigError(f"{what}: expected integers, got {text!r}")
    return [int(v) for v in vals]


def _out_dir(opts: Options) -> Path:
    out = Path(opts.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc.strerror}") from None
    return out


def _silverman(y: np.ndarray) -> float:
    sd = float(np.std(y, ddof=1)) if len(y) > 1 else 0.0
    h = 1.06 * sd * len(y) ** (-1 / 5)
    return h if h > 0 else 1.0


def _base_estimator(opts: Options, sample: FunctionalSample) -> tuple[EstimatorConfig, int | None]:
    """Estimator config from options; returns the kNN rank when h_k is to be set per query."""
    spec = SemiMetricSpec(opts.semimetric, opts.q)
    if spec.family == "pca":
        spec = fit_pca(spec, sample)
    hh = float(opts.hh) if opts.hh is not None else _silverman(sample.responses)
    knn = opts.knn
    if opts.hk is not None and knn is not None:
        raise ConfigError("give either --hk or --knn, not both")
    if opts.hk is None and knn is None:
        knn = max(1, math.ceil(0.10 * len(sample)))
    if knn is not None and not 1 <= int(knn) <= len(sample):
        raise ConfigError(f"--knn must lie in [1, {len(sample)}]")
    y = sample.responses
    lower = float(opts.lower) if opts.lower is not None else float(y.min() - hh)
    upper = float(opts.upper) if opts.upper is not None else float(y.max() + hh)
    interval = ModeSearchInterval(lower, upper, int(opts.grid_points))
    cfg = EstimatorConfig(
        semimetric=spec,
        k_kernel=get_kernel("K", opts.k_kernel),
        h_kernel=get_kernel("H", opts.h_kernel),
        h_k=float(opts.hk) if opts.hk is not None else 1.0,
        h_h=hh,
        interval=interval,
    )
    return cfg, (int(knn) if knn is not None else None)


def _bandwidth_grid(opts: Options, sample: FunctionalSample) -> BandwidthGrid:
    if opts.hk_candidates is not None and opts.knn_candidates is not None:
        raise ConfigError("give either --hk-candidates or --knn-candidates, not both")
    default = BandwidthGrid.default(sample.responses, knn=True)
    hh = _floats(opts.hh_candidates, "--hh-candidates") if opts.hh_candidates is not None else default.hh_candidates
    if opts.hk_candidates is not None:
        return BandwidthGrid(tuple(_floats(opts.hk_candidates, "--hk-candidates")), tuple(hh), knn=False)
    if opts.knn_candidates is not None:
        return BandwidthGrid(tuple(_ints(opts.knn_candidates, "--knn-candidates")), tuple(hh), knn=True)
    ranks = tuple(k for k in default.hk_candidates if k <= len(sample) - 1) or (1,)
    return BandwidthGrid(ranks, tuple(hh), knn=True)


def _write_cv(out: Path, cv) -> Path:
    path = out / "cv.csv"
    io.write_table_csv(
        path,
        ["h_k", "h_h", "score", "excluded_folds", "eligible"],
        ([r["h_k"], r["h_h"], r["score"], r["excluded_folds"], int(r["eligible"])] for r in cv.table),
    )
    io.write_json(out / "cv.json", cv.to_json())
    return path


def cmd_density(opts: Options) -> int:
    sample = io.read_sample(opts.args.curves, opts.args.responses)
    require_valid(sample)
    queries = io.read_curves_csv(opts.args.query)
    qid = opts.query_id
    if qid is None:
        if len(queries) != 1:
            raise ConfigError(f"{opts.args.query} holds {len(queries)} series; pick one with --query-id")
        qid = next(iter(queries))
    if qid not in queries:
        raise ConfigError(f"query series {qid!r} not found in {opts.args.query}")
    x = queries[qid]
    if not x.same_grid(sample.curves[0]):
        raise DataError(f"{opts.args.query}: query curve is not on the sample time grid")
    cfg, knn = _base_estimator(opts, sample)
    if knn is not None:
        cfg = cfg.with_bandwidths(h_k=knn_bandwidth(cfg.semimetric, sample, x, knn))
    est = mode_estimate(cfg, sample, x)
    out = _out_dir(opts)
    io.write_density_csv(out / "density.csv", est.curve.y_grid, est.curve.density)
    io.write_json(
        out / "density.json",
        {
            "command": "density",
            "query_id": qid,
            "effective_n": est.effective_n,
            "n": len(sample),
            "knn_k": knn,
            "mode": est.to_json(),
            "warnings": est.warnings,
            "config": cfg.describe(),
            "density_curve_path": "density.csv",
        },
    )
    for w in est.warnings:
        log.warning(w)
    print(f"theta_hat={est.theta_hat:.6g} effective_n={est.effective_n} h_k={cfg.h_k:.6g} h_h={cfg.h_h:.6g}")
    return 0


def cmd_predict(opts: Options) -> int:
    path = io.read_series_csv(opts.args.series)
    if opts.segments is None:
        raise ConfigError("--segments is required")
    slicing = PathSlicingConfig(int(opts.segments), opts.characteristic, bool(opts.center))
    sample = build_pairs(slice_path(path, slicing), slicing.characteristic, slicing.center)
    cfg, knn = _base_estimator(opts, sample)
    grid = None
    if opts.cv:
        if len(sample) < 3:
            raise DataError(f"--cv needs at least 3 pairs ({len(sample)} available)")
        grid = _bandwidth_grid(opts, sample)
        knn = None
    report = predict_next(
        path,
        slicing,
        cfg,
        bandwidth_grid=grid,
        knn_k=knn,
        interval_from_data=opts.lower is None and opts.upper is None,
        workers=int(opts.workers),
    )
    out = _out_dir(opts)
    io.write_density_csv(out / "density.csv", report.density.y_grid, report.density.density)
    payload = {"command": "predict", **report.to_json(), "density_curve_path": "density.csv"}
    if report.cv is not None:
        payload["cv_table_path"] = _write_cv(out, report.cv).name
    payload["config"] = {
        "segments": slicing.n_segments,
        "characteristic": slicing.characteristic,
        "center": slicing.center,
        "semimetric": opts.semimetric,
        "k_kernel": opts.k_kernel,
        "h_kernel": opts.h_kernel,
        "grid_points": int(opts.grid_points),
    }
    io.write_json(out / "prediction.json", payload)
    for w in report.warnings:
        log.warning(w)
    print(f"prediction={report.prediction:.6g} effective_n={report.effective_n}")
    return 0


def cmd_cv(opts: Options) -> int:
    sample = io.read_sample(opts.args.curves, opts.args.responses)
    require_valid(sample)
    cfg, _ = _base_estimator(opts, sample)
    grid = _bandwidth_grid(opts, sample)
    cv = cv_select(grid, cfg, sample, workers=int(opts.workers))
    out = _out_dir(opts)
    _write_cv(out, cv)
    print(f"selected h_k={cv.h_k} ({'kNN rank' if cv.knn else 'radius'}) h_h={cv.h_h:.6g} score={cv.score:.6g}")
    return 0


def cmd_simulate(opts: Options) -> int:
    gen = GeneratorSpec(
        driver=opts.driver,
        rho=float(opts.rho),
        sigma=float(opts.sigma),
        noise=opts.noise,
        link=opts.link,
        lag_weight=float(opts.lag_weight),
        grid_points=int(opts.curve_points),
        seed=int(opts.seed),
    )
    study = RateStudyConfig(
        n_grid=tuple(_ints(opts.n_grid, "--n-grid")),
        replications=int(opts.reps),
        p=float(opts.p),
        j=int(opts.j),
        b1=float(opts.b1),
        b2=float(opts.b2),
        knn_fraction=float(opts.knn_fraction),
        hh_scale=float(opts.hh_scale),
        hh_exponent=float(opts.hh_exponent),
        grid_points=int(opts.grid_points),
        semimetric=opts.semimetric,
        semimetric_q=int(opts.q),
        seed=int(opts.seed),
    )
    workers = int(opts.workers)
    if workers < 1:
        raise ConfigError("--workers must be >= 1")
    report = rate_study(gen, study, workers=workers)
    out = _out_dir(opts)
    io.write_table_csv(
        out / "study.csv",
        ["n", "replication", "abs_error", "excluded", "h_k", "h_h"],
        ([r["n"], r["replication"], r["abs_error"], r["excluded"], r["h_k"], r["h_h"]] for r in report.rows),
    )
    io.write_table_csv(
        out / "study_curve.dat",
        ["n", "lp_error", "median_abs_error", "log_n", "log_lp_error"],
        (
            [r["n"], r["lp_error"], r["median_abs_error"], math.log(r["n"]), math.log(r["lp_error"])]
            for r in report.per_n
            if r["lp_error"] > 0
        ),
    )
    io.write_json(out / "study.json", {"command": "simulate", **report.summary()})
    print(f"{'n':>6} {'Lp error':>10} {'median':>10} {'mean h_k':>10}")
    for r in report.per_n:
        print(f"{r['n']:>6} {r['lp_error']:>10.4f} {r['median_abs_error']:>10.4f} {r['mean_h_k']:>10.4f}")
    print(f"slope={report.slope:.4f} reference_exponent={report.reference['reference_exponent']:.4f} "
          f"excluded={report.excluded_count}")
    return 0


COMMANDS = {"density": cmd_density, "predict": cmd_predict, "cv": cmd_cv, "simulate": cmd_simulate}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s"
        )
        return COMMANDS[args.command](Options(args))
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
