"""Monte Carlo driver for the circle, noise and GBM experiments.

Every trial runs generate -> [embed] -> Rips -> summaries. Trial ``t`` of an
experiment draws from the stream keyed ``(seed, experiment, t)`` at every grid
value, so neighbouring grid points share their randomness (common random
numbers) and curve differences are not swamped by sampling noise.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import entropy as ent
from . import synth
from .barcode import UndefinedResultError, format_float
from .rips import rips_persistence
from .summaries import tsi, tsigi

STATISTICS: dict[str, Callable] = {
    "tsi": tsi,
    "tsigi": tsigi,
    "entropy": ent.persistent_entropy,
    "renyi2": lambda b: ent.renyi_entropy(b, 2),
    "cvtsi": ent.cvtsi,
    "cvtsi_over_n": ent.cvtsi_over_n,
}

DEFAULT_GRIDS: dict[str, list[float]] = {
    "disjoint_circles": [24, 48, 96],
    "intertwined_circles": [24, 48, 96, 192],
    "sampled_circles": [20, 40, 80, 120, 160, 200, 250, 300],
    "gaussian_noise": [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3],
    "uniform_noise": [0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
    "gbm_volatility": [0.05, 0.1, 0.2, 0.4, 0.8],
    "gbm_drift": [-0.2, -0.1, 0.0, 0.1, 0.2],
}

DEFAULT_OPTIONS: dict[str, dict] = {
    "gaussian_noise": {"n_points": 200},
    "uniform_noise": {"n_points": 100, "base_outliers": 100},
    "gbm_volatility": {"mu": 0.0, "s0": 1.0, "dt": 1 / 250, "steps": 500, "dim": 3, "tau": 3},
    "gbm_drift": {"sigma": 0.1, "s0": 1.0, "dt": 1 / 250, "steps": 500, "dim": 3, "tau": 3},
}

CSV_COLUMNS = ("experiment", "parameter", "statistic", "mean", "std", "trials", "skipped")


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    parameter_grid: tuple[float, ...] = ()
    trials: int = 100
    seed: int = 0
    statistics: tuple[str, ...] = ("tsi", "tsigi", "entropy", "cvtsi", "cvtsi_over_n")
    degree: int = 1
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in DEFAULT_GRIDS:
            raise ValueError(f"unknown experiment {self.name!r}; choose from {sorted(DEFAULT_GRIDS)}")
        grid = tuple(float(x) for x in (self.parameter_grid or DEFAULT_GRIDS[self.name]))
        object.__setattr__(self, "parameter_grid", grid)
        object.__setattr__(self, "statistics", tuple(self.statistics))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        bad = set(self.statistics) - set(STATISTICS)
        if bad:
            raise ValueError(f"unknown statistics {sorted(bad)}")
        if self.degree not in (0, 1):
            raise ValueError("degree must be 0 or 1")
        opts = dict(DEFAULT_OPTIONS.get(self.name, {}))
        unknown = set(self.options) - set(opts)
        if unknown:
            raise ValueError(f"unknown options for {self.name}: {sorted(unknown)}")
        opts.update(self.options)
        object.__setattr__(self, "options", opts)

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        allowed = {"name", "parameter_grid", "trials", "seed", "statistics", "degree", "options"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> ExperimentConfig:
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["parameter_grid"] = list(self.parameter_grid)
        d["statistics"] = list(self.statistics)
        return d


@dataclass(frozen=True)
class CurvePoint:
    parameter: float
    statistic: str
    mean: float
    std: float
    trials: int
    skipped: int = 0


def aggregate(values) -> tuple[float, float, int]:
    """Mean, (n-1)-normalized standard deviation and count; std of one value is 0."""
    vals = [float(v) for v in values]
    if not vals:
        raise ValueError("cannot aggregate an empty list")
    n = len(vals)
    mean = math.fsum(vals) / n
    if n == 1:
        return mean, 0.0, 1
    var = math.fsum((v - mean) ** 2 for v in vals) / (n - 1)
    return mean, math.sqrt(var), n


def generate(name: str, param: float, options: dict, rng: synth.RngSeed) -> np.ndarray:
    """Point cloud for one trial of experiment ``name`` at grid value ``param``."""
    if name == "disjoint_circles":
        return synth.disjoint_circles(int(param))
    if name == "intertwined_circles":
        return synth.intertwined_circles(int(param))
    if name == "sampled_circles":
        return synth.sampled_intertwined_circles(int(param), rng)
    if name == "gaussian_noise":
        base = synth.sampled_intertwined_circles(options["n_points"], rng.spawn("sample"))
        return synth.add_gaussian_noise(base, param, rng.spawn("noise"))
    if name == "uniform_noise":
        base = synth.sampled_intertwined_circles(options["n_points"], rng.spawn("sample"))
        return synth.add_uniform_outliers(base, param, options["base_outliers"], rng.spawn("noise"))
    if name in ("gbm_volatility", "gbm_drift"):
        mu = options["mu"] if name == "gbm_volatility" else param
        sigma = param if name == "gbm_volatility" else options["sigma"]
        gp = synth.GbmParams(mu=mu, sigma=sigma, s0=options["s0"], dt=options["dt"], steps=options["steps"])
        path = synth.gbm_path(gp, rng)
        return synth.takens_embed(path, options["dim"], options["tau"])
    raise ValueError(f"unknown experiment {name!r}")


def run_trial(cfg: ExperimentConfig, param: float, trial: int) -> dict[str, float | None]:
    rng = synth.RngSeed(cfg.seed, cfg.name, trial)
    pc = generate(cfg.name, param, cfg.options, rng)
    barcode = rips_persistence(pc, max_dim=max(cfg.degree, 1))[cfg.degree]
    out: dict[str, float | None] = {}
    for stat in cfg.statistics:
        try:
            out[stat] = float(STATISTICS[stat](barcode))
        except UndefinedResultError:
            out[stat] = None
    return out


def _run_task(args):
    cfg, param, trial = args
    return run_trial(cfg, param, trial)


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> list[CurvePoint]:
    """One curve point per (grid value, statistic); undefined trial values are skipped and counted."""
    tasks = [(cfg, p, t) for p in cfg.parameter_grid for t in range(cfg.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_task, tasks, chunksize=max(1, cfg.trials // 4)))
    else:
        results = [_run_task(t) for t in tasks]

    points = []
    for gi, param in enumerate(cfg.parameter_grid):
        block = results[gi * cfg.trials : (gi + 1) * cfg.trials]
        for stat in cfg.statistics:
            vals = [r[stat] for r in block if r[stat] is not None]
            skipped = len(block) - len(vals)
            if vals:
                mean, std, count = aggregate(vals)
            else:
                mean, std, count = math.nan, math.nan, 0
            points.append(CurvePoint(param, stat, mean, std, count, skipped))
    return points


def curve(points: list[CurvePoint], statistic: str) -> tuple[np.ndarray, np.ndarray]:
    """``(parameters, means)`` for one statistic, in grid order."""
    sel = [p for p in points if p.statistic == statistic]
    return np.array([p.parameter for p in sel]), np.array([p.mean for p in sel])


def write_curves(fh, name: str, points: list[CurvePoint]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for p in points:
        writer.writerow([
            name,
            format_float(p.parameter),
            p.statistic,
            format_float(p.mean),
            format_float(p.std),
            p.trials,
            p.skipped,
        ])


def curves_to_csv(name: str, points: list[CurvePoint]) -> str:
    buf = io.StringIO()
    write_curves(buf, name, points)
    return buf.getvalue()
