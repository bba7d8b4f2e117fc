"""Batch synthesis over an epsilon grid, least-squares scaling fits and table emission."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from hiersynth.costs import CostModel
from hiersynth.kdindex import index_database
from hiersynth.psu2 import GateSetSpec, build_gate_set, haar_random_quaternions
from hiersynth.seqdb import ResourceLimitError, SequenceDatabase, load, save
from hiersynth.synth import GrowthPolicy, SynthesisResult, batch_synthesize

TABLE_COLUMNS = ("epsilon", "mean_cost", "stderr_cost", "n")
FIT_COLUMNS = ("slope", "intercept", "slope_ci", "intercept_ci", "residual_std", "r_squared", "n")
CONFIDENCE = 0.95
FLOAT_FMT = "%.12g"


def default_epsilons(n: int = 8, largest: float = 0.1, smallest: float = 0.01) -> list[float]:
    return np.geomspace(largest, smallest, n).tolist()


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator, so target lists reproduce across platforms."""
    return np.random.Generator(np.random.Philox(seed))


def draw_targets(seed: int, n: int) -> np.ndarray:
    return haar_random_quaternions(make_rng(seed), n)


def target_hash(targets: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(targets, dtype="<f8").tobytes()).hexdigest()[:16]


@dataclass
class ExperimentSpec:
    gate_set: GateSetSpec
    cost_model: CostModel
    epsilons: list[float] = field(default_factory=default_epsilons)
    n_targets: int = 100
    seed: int = 0
    ceiling: float = math.inf
    db_cache: str | None = None
    out: str | None = None

    def __post_init__(self):
        self.epsilons = [float(e) for e in self.epsilons]
        if not self.epsilons or any(not e > 0 for e in self.epsilons):
            raise ValueError("epsilons must be nonempty and strictly positive")
        if self.n_targets < 1:
            raise ValueError("need at least one target")


@dataclass
class ExperimentRow:
    epsilon: float
    mean_cost: float
    stderr_cost: float
    n: int


@dataclass
class ExperimentTable:
    rows: list[ExperimentRow]
    target_hash: str
    watermark: float
    partial: bool = False
    results: dict[float, list[SynthesisResult]] = field(default_factory=dict)

    def points(self) -> list[tuple[float, float]]:
        """(log10(1/eps), mean cost) pairs ready for ``ols_fit``."""
        return [(math.log10(1 / r.epsilon), r.mean_cost) for r in self.rows]


class ExperimentIncomplete(ResourceLimitError):
    """Growth ceiling hit mid-experiment; ``table`` holds the epsilons finished so far."""

    def __init__(self, message: str, table: ExperimentTable):
        super().__init__(message)
        self.table = table


def _open_database(spec: ExperimentSpec) -> SequenceDatabase:
    gates = build_gate_set(spec.gate_set)
    if spec.db_cache and Path(spec.db_cache).exists():
        return load(spec.db_cache, gate_set=gates, cost_model=spec.cost_model)
    return SequenceDatabase(gates, spec.cost_model)


def run_experiment(spec: ExperimentSpec, targets=None, db: SequenceDatabase | None = None,
                   keep_results: bool = False, threads: int | None = None) -> ExperimentTable:
    """Synthesize the same targets at every epsilon and tabulate per-epsilon cost statistics.

    ``targets`` overrides the seeded Haar draw (an (N, 4) quaternion array).  Epsilons are
    processed from loosest to tightest so each step only extends the database.
    """
    if targets is None:
        targets = draw_targets(spec.seed, spec.n_targets)
    targets = np.asarray(targets, dtype=float).reshape(-1, 4)
    thash = target_hash(targets)
    db = db or _open_database(spec)
    index = index_database(db)
    policy = GrowthPolicy(ceiling=spec.ceiling)
    by_eps = {}
    kept = {}
    partial = None
    for eps in sorted(set(spec.epsilons), reverse=True):
        if target_hash(targets) != thash:
            raise RuntimeError("target list changed between epsilons")
        try:
            results = batch_synthesize(db, index, targets, eps, policy, threads=threads)
        except ResourceLimitError as exc:
            partial = exc
            break
        costs = np.array([r.cost for r in results])
        se = costs.std(ddof=1) / math.sqrt(len(costs)) if len(costs) > 1 else 0.0
        by_eps[eps] = ExperimentRow(eps, float(costs.mean()), float(se), len(costs))
        if keep_results:
            kept[eps] = results
    if spec.db_cache:
        save(db, spec.db_cache)
    rows = [by_eps[e] for e in spec.epsilons if e in by_eps]
    table = ExperimentTable(rows, thash, db.generated_up_to, partial is not None, kept)
    if spec.out:
        emit(table, spec.out)
    if partial is not None:
        raise ExperimentIncomplete(str(partial), table)
    return table


@dataclass
class FitResult:
    slope: float
    intercept: float
    slope_ci: float
    intercept_ci: float
    residual_std: float
    r_squared: float
    n: int


def ols_fit(points) -> FitResult:
    """Least squares y = slope*x + intercept with t-based 95% half-widths (n - 2 dof)."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    x, y = pts[:, 0], pts[:, 1]
    n = len(x)
    if n < 3:
        raise ValueError("need at least three points")
    if len(np.unique(x)) < 2:
        raise ValueError("x values are degenerate")
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    slope = float(((x - xm) * (y - ym)).sum() / sxx)
    intercept = float(ym - slope * xm)
    resid = y - (slope * x + intercept)
    sse = float(resid @ resid)
    s2 = sse / (n - 2)
    tq = float(stats.t.ppf(0.5 + CONFIDENCE / 2, n - 2))
    se_slope = math.sqrt(s2 / sxx)
    se_icpt = math.sqrt(s2 * (1 / n + xm * xm / sxx))
    sst = float(((y - ym) ** 2).sum())
    r2 = 1 - sse / sst if sst > 0 else 1.0
    return FitResult(slope, intercept, tq * se_slope, tq * se_icpt, math.sqrt(s2), r2, n)


def scaling_reduction(fit_a: FitResult, fit_b: FitResult) -> tuple[float, float]:
    """Percent slope reduction of ``fit_b`` relative to ``fit_a`` and its propagated half-width."""
    a, b = fit_a.slope, fit_b.slope
    if not a > 0:
        raise ValueError("baseline slope must be positive")
    pct = 100 * (1 - b / a)
    unc = 100 * math.hypot(fit_b.slope_ci / a, b * fit_a.slope_ci / (a * a))
    return pct, unc


# ------------------------------------------------------------------ emission
def _records(obj) -> tuple[tuple[str, ...], list[dict]]:
    if isinstance(obj, ExperimentTable):
        return TABLE_COLUMNS, [asdict(r) for r in obj.rows]
    if isinstance(obj, FitResult):
        return FIT_COLUMNS, [asdict(obj)]
    if isinstance(obj, list) and all(isinstance(r, ExperimentRow) for r in obj):
        return TABLE_COLUMNS, [asdict(r) for r in obj]
    raise TypeError(f"cannot emit {type(obj).__name__}")


def _fmt(v) -> str:
    return str(v) if isinstance(v, (int, np.integer)) else FLOAT_FMT % v


def dumps(obj, fmt: str = "csv") -> str:
    columns, records = _records(obj)
    if fmt == "json":
        body = {"columns": list(columns),
                "records": [{c: float(_fmt(r[c])) if not isinstance(r[c], int) else r[c]
                             for c in columns} for r in records]}
        if isinstance(obj, ExperimentTable):
            body.update(target_hash=obj.target_hash, watermark=obj.watermark, partial=obj.partial)
        return json.dumps(body, indent=2) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in records:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def emit(obj, path, fmt: str | None = None) -> Path:
    path = Path(path)
    fmt = fmt or ("json" if path.suffix == ".json" else "csv")
    with open(path, "w", newline="\n") as fh:
        fh.write(dumps(obj, fmt))
    return path


def read_records(path) -> list[dict]:
    """Parse an emitted CSV or JSON file back into a list of column -> value dicts."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        return json.loads(text)["records"]
    rows = list(csv.DictReader(io.StringIO(text)))
    return [{k: int(v) if k == "n" else float(v) for k, v in r.items()} for r in rows]


def read_table(path) -> list[ExperimentRow]:
    return [ExperimentRow(r["epsilon"], r["mean_cost"], r["stderr_cost"], int(r["n"]))
            for r in read_records(path)]


def fit_table(rows) -> FitResult:
    return ols_fit([(math.log10(1 / r.epsilon), r.mean_cost) for r in rows])
