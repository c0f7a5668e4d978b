"""``tsikit`` command line: stats, ph, gen, experiment, verify.

Data goes to stdout (or ``-o``); diagnostics go to stderr. Exit status is 0 on
success, 1 on a domain error or a failed bound, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import incremental as inc
from . import metrics, synth
from .barcode import (
    Bar,
    Barcode,
    DiagramParseError,
    UndefinedResultError,
    format_float,
    load_diagram,
    load_point_cloud,
    write_diagram,
    write_point_cloud,
)
from .entropy import cvtsi
from .harness import ExperimentConfig, run_experiment, write_curves
from .rips import rips_persistence
from .summaries import summarize, tsi


class UsageError(Exception):
    pass


def _open_out(path):
    if path in (None, "-"):
        return contextlib.nullcontext(sys.stdout)
    return open(path, "w", newline="")


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


# --- stats ------------------------------------------------------------------


def cmd_stats(args) -> int:
    diagrams = load_diagram(args.diagram, cap=args.cap)
    if args.degree is None:
        degrees = sorted(diagrams) or [1]
    else:
        degrees = [args.degree]
    reports = []
    for d in degrees:
        if d in diagrams:
            b = diagrams[d]
        elif not diagrams:
            b = Barcode((), d)
        else:
            raise UndefinedResultError(
                f"degree {d} not in diagram; present degrees: {sorted(diagrams)}"
            )
        reports.append(summarize(b, n_moments=args.moments))
    with _open_out(args.output) as fh:
        if args.format == "json":
            payload = [{k: _json_value(v) for k, v in r.to_dict().items()} for r in reports]
            fh.write(json.dumps(payload, indent=2) + "\n")
        else:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["degree"] + reports[0].columns())
            for r in reports:
                writer.writerow([r.degree] + r.csv_row())
    return 0


# --- ph ---------------------------------------------------------------------


def cmd_ph(args) -> int:
    pc = load_point_cloud(args.points)
    diagrams = rips_persistence(pc, max_dim=args.max_dim, max_radius=args.max_radius)
    with _open_out(args.output) as fh:
        write_diagram(fh, diagrams)
    return 0


# --- gen --------------------------------------------------------------------


def cmd_gen(args) -> int:
    rng = synth.RngSeed(args.seed, f"gen/{args.kind}", args.trial)
    series = None
    if args.kind == "circle":
        pc = synth.circle_equidistant(args.radius, args.n, (args.cx, args.cy))
    elif args.kind == "circle-uniform":
        pc = synth.circle_uniform(args.radius, args.n, (args.cx, args.cy), rng)
    elif args.kind == "disjoint":
        pc = synth.disjoint_circles(args.n)
    elif args.kind == "intertwined":
        pc = synth.intertwined_circles(args.n)
    elif args.kind == "sampled":
        pc = synth.sampled_intertwined_circles(args.n, rng)
    elif args.kind == "gaussian":
        base = synth.sampled_intertwined_circles(args.n, rng.spawn("sample"))
        pc = synth.add_gaussian_noise(base, args.sigma, rng.spawn("noise"))
    elif args.kind == "uniform":
        base = synth.sampled_intertwined_circles(args.n, rng.spawn("sample"))
        pc = synth.add_uniform_outliers(base, args.r, args.base_outliers, rng.spawn("noise"))
    elif args.kind == "gbm":
        gp = synth.GbmParams(args.mu, args.sigma, args.s0, args.dt, args.steps)
        series = synth.gbm_path(gp, rng)
        pc = None if args.series else synth.takens_embed(series, args.dim, args.tau)
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown kind {args.kind}")
    with _open_out(args.output) as fh:
        if pc is None:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["step", "value"])
            for i, v in enumerate(series):
                writer.writerow([i, format_float(v)])
        else:
            write_point_cloud(fh, pc)
    return 0


# --- experiment ---------------------------------------------------------------


def cmd_experiment(args) -> int:
    cfg_dict = json.loads(Path(args.config).read_text())
    if args.seed is not None:
        cfg_dict["seed"] = args.seed
    if args.trials is not None:
        cfg_dict["trials"] = args.trials
    cfg = ExperimentConfig.from_dict(cfg_dict)
    points = run_experiment(cfg, workers=args.workers)
    with _open_out(args.output) as fh:
        write_curves(fh, cfg.name, points)
    return 0


# --- verify -----------------------------------------------------------------

BOUNDS = (
    "tsi_wasserstein_empty",
    "popoviciu",
    "tsi_equal_cardinality",
    "cvtsi_stability",
    "tsi_insert",
    "tsi_delete",
    "cvtsi_insert",
)
PAIR_BOUNDS = {"tsi_equal_cardinality", "cvtsi_stability"}
ORACLE_RTOL = 1e-10


def _oracle_record(name, formula, scratch):
    err = abs(formula - scratch)
    tol = ORACLE_RTOL * max(1.0, abs(scratch))
    return metrics.BoundCheck(name, err, tol, err <= tol)


def _single_checks(b: Barcode, bounds, ell: float | None):
    out = []
    lt = b.lifetimes
    if "tsi_wasserstein_empty" in bounds:
        out.append(metrics.check_tsi_empty_bound(b, 2.0))
        out.append(metrics.check_tsi_empty_bound(b, math.inf))
    if "popoviciu" in bounds:
        out.append(metrics.check_popoviciu_bound(b))
    if ell is not None and "tsi_insert" in bounds:
        out.append(_oracle_record("tsi_insert", inc.tsi_after_insert(lt, ell), tsi(np.append(lt, ell))))
    if "tsi_delete" in bounds and len(lt) >= 3:
        out.append(_oracle_record("tsi_delete", inc.tsi_after_delete(lt, lt[-1]), tsi(lt[:-1])))
    if ell is not None and "cvtsi_insert" in bounds and b.total_persistence > 0:
        out.append(_oracle_record("cvtsi_insert", inc.cvtsi_after_insert(lt, ell), cvtsi(np.append(lt, ell))))
    return out


def _pair_checks(b1, b2, bounds):
    out = []
    if "tsi_equal_cardinality" in bounds:
        out.append(metrics.check_equal_cardinality_bound(b1, b2))
    if "cvtsi_stability" in bounds:
        out.append(metrics.check_cvtsi_stability_bound(b1, b2))
    return out


def _random_barcode(gen, n):
    births = gen.uniform(0, 1, n)
    return Barcode.from_pairs(zip(births, births + gen.uniform(0, 10, n)))


def _perturb(gen, b: Barcode, eps: float):
    bars = []
    for x in b.bars:
        birth = x.birth + gen.uniform(-eps, eps)
        death = max(x.death + gen.uniform(-eps, eps), birth)
        bars.append(Bar(x.degree, birth, death))
    return Barcode(tuple(bars), b.degree)


def cmd_verify(args) -> int:
    bounds = set(BOUNDS) if args.bound is None else {args.bound}
    records = []
    if args.random is not None:
        n, trials = args.random
        if n < 3:
            raise UsageError("--random needs at least 3 bars")
        gen = synth.RngSeed(args.seed, "verify", 0).generator()
        for _ in range(trials):
            b = _random_barcode(gen, n)
            records += _single_checks(b, bounds, float(gen.uniform(0, 10)))
            if bounds & PAIR_BOUNDS:
                records += _pair_checks(b, _perturb(gen, b, 10 ** gen.uniform(-4, 0)), bounds)
    else:
        if args.diagram is None:
            raise UsageError("give a diagram file or --random N TRIALS")
        b = _pick_degree(load_diagram(args.diagram), args.degree)
        if b.n < 2:
            raise UsageError("bound checks need at least two finite bars")
        records += _single_checks(b, bounds, args.ell)
        if bounds & PAIR_BOUNDS:
            if args.other is None:
                if args.bound in PAIR_BOUNDS:
                    raise UsageError(f"{args.bound} needs --other DIAGRAM")
            else:
                b2 = _pick_degree(load_diagram(args.other), args.degree)
                if b2.n != b.n:
                    raise UsageError(f"{args.bound or 'pair bounds'} need equal bar counts: {b.n} vs {b2.n}")
                records += _pair_checks(b, b2, bounds)
    with _open_out(args.output) as fh:
        for r in records:
            fh.write(json.dumps({k: _json_value(v) for k, v in r.as_dict().items()}) + "\n")
    failed = [r for r in records if not r.holds]
    if failed:
        print(f"{len(failed)} of {len(records)} checks failed", file=sys.stderr)
        return 1
    return 0


def _pick_degree(diagrams, degree):
    if degree not in diagrams:
        raise UndefinedResultError(f"degree {degree} not in diagram; present degrees: {sorted(diagrams)}")
    return diagrams[degree]


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tsikit", description="Barcode variance and entropy summaries.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("stats", help="summary statistics of a diagram CSV")
    s.add_argument("diagram")
    s.add_argument("--degree", type=int)
    s.add_argument("--moments", type=int, default=3, help="report M_1..M_K")
    s.add_argument("--format", choices=("json", "csv"), default="json")
    s.add_argument("--cap", type=float, help="truncate infinite deaths here instead of dropping them")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("ph", help="Rips persistence of a point-cloud CSV")
    s.add_argument("points")
    s.add_argument("--max-dim", type=int, choices=(0, 1), default=1)
    s.add_argument("--max-radius", type=float)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_ph)

    s = sub.add_parser("gen", help="generate a point cloud or time series")
    s.add_argument(
        "kind",
        choices=("circle", "circle-uniform", "disjoint", "intertwined", "sampled", "gaussian", "uniform", "gbm"),
    )
    s.add_argument("--n", type=int, default=100)
    s.add_argument("--radius", type=float, default=1.0)
    s.add_argument("--cx", type=float, default=0.0)
    s.add_argument("--cy", type=float, default=0.0)
    s.add_argument("--sigma", type=float, default=0.1)
    s.add_argument("--r", type=float, default=0.5, help="outlier intensity in [0, 1]")
    s.add_argument("--base-outliers", type=int, default=100)
    s.add_argument("--mu", type=float, default=0.0)
    s.add_argument("--s0", type=float, default=1.0)
    s.add_argument("--dt", type=float, default=1 / 250)
    s.add_argument("--steps", type=int, default=500)
    s.add_argument("--dim", type=int, default=3)
    s.add_argument("--tau", type=int, default=3)
    s.add_argument("--series", action="store_true", help="emit the GBM time series instead of its embedding")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trial", type=int, default=0)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("experiment", help="run a Monte Carlo experiment from a JSON config")
    s.add_argument("config")
    s.add_argument("--seed", type=int)
    s.add_argument("--trials", type=int)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_experiment)

    s = sub.add_parser("verify", help="check stability bounds and update formulas")
    s.add_argument("diagram", nargs="?")
    s.add_argument("--random", type=int, nargs=2, metavar=("N", "TRIALS"))
    s.add_argument("--bound", choices=BOUNDS)
    s.add_argument("--other", help="second diagram for the two-barcode bounds")
    s.add_argument("--degree", type=int, default=1)
    s.add_argument("--ell", type=float, help="lifetime inserted for the update-formula checks")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (DiagramParseError, UndefinedResultError, ValueError, OSError) as exc:
        print(f"tsikit: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
