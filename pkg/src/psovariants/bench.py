"""Batch experiments: repeated seeded runs per (variant, objective, config) cell.

Run ``i`` of a cell uses seed ``seed + i``, so a batch can be extended or
re-run partially and still produce the same per-run rows.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .core import NonFiniteObjectiveError, SwarmConfig, Variant, run
from .metrics import NOT_FOUND, RunReport, aggregate
from .objectives import get_objective

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
CSV_COLUMNS = ["seed", "variant", "objective", "d", "D", "k_max", "A", "K", "wall_ms"]
FAILED = "FAILED"
# fields that must agree before two cell summaries can be compared
COMPARABLE_FIELDS = ("objective", "d", "D", "k_max", "runs", "efficiency_threshold")


@dataclass(frozen=True)
class CellConfig:
    variant: str = "psoc"
    objective: str = "griewank"
    d: int = 5
    D: int = 35
    k_max: int = 150
    runs: int = 100
    seed: int = 0
    efficiency_threshold: Optional[float] = None
    fuzzy_config: Optional[str] = None
    bayes_config: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant).value)
        get_objective(self.objective).bounds(self.d)
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")

    def swarm_config(self, index: int) -> SwarmConfig:
        spec = get_objective(self.objective)
        return SwarmConfig(
            bounds=spec.bounds(self.d),
            D=self.D,
            k_max=self.k_max,
            variant=self.variant,
            seed=self.seed + index,
        )

    @property
    def name(self) -> str:
        return f"{self.variant}_{self.objective}_d{self.d}_D{self.D}_k{self.k_max}"


@dataclass(frozen=True)
class RunRow:
    seed: int
    variant: str
    objective: str
    d: int
    D: int
    k_max: int
    A: object
    K: object
    wall_ms: float
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None

    def csv_values(self) -> list:
        return [self.seed, self.variant, self.objective, self.d, self.D, self.k_max,
                _fmt(self.A), _fmt(self.K), f"{self.wall_ms:.3f}"]


@dataclass
class CellResult:
    cell: CellConfig
    rows: list
    reports: list = field(repr=False)
    wall_time: float = 0.0

    def summary(self) -> dict:
        ok = [r for r in self.reports if r is not None]
        body = {
            "schema_version": SCHEMA_VERSION,
            "cell": self.cell.name,
            "variant": self.cell.variant,
            "objective": self.cell.objective,
            "config": asdict(self.cell),
            "failed": sum(row.failed for row in self.rows),
            "failures": [{"seed": row.seed, "error": row.error} for row in self.rows if row.failed],
        }
        if ok:
            body.update(aggregate(ok).as_dict())
        else:
            body.update({"runs": 0, "accuracy": None, "efficiency": None})
        body["metadata"] = {
            "wall_time_s": self.wall_time,
            "created_unix": time.time(),
        }
        return body


def _fmt(value):
    if value is None:
        return NOT_FOUND
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _build_strategy(cell: CellConfig, config: SwarmConfig):
    if cell.variant == Variant.PSOF.value and cell.fuzzy_config:
        from .fuzzy import FuzzyStrategy, load_fuzzy_system

        return FuzzyStrategy(load_fuzzy_system(cell.fuzzy_config))
    if cell.variant == Variant.PSOB.value and cell.bayes_config:
        from .bayes import BayesStrategy, load_bayes_params

        return BayesStrategy(load_bayes_params(cell.bayes_config, config.bounds, config.D))
    return None


def run_one(cell: CellConfig, index: int) -> tuple[RunRow, Optional[RunReport]]:
    """Execute run ``index`` of ``cell``; non-finite objectives mark it failed."""
    spec = get_objective(cell.objective)
    config = cell.swarm_config(index)
    started = time.perf_counter()
    base = dict(seed=config.seed, variant=cell.variant, objective=cell.objective,
                d=cell.d, D=cell.D, k_max=cell.k_max)
    try:
        report = run(
            config,
            spec.func,
            strategy=_build_strategy(cell, config),
            objective_name=spec.name,
            f_star=spec.f_star,
            efficiency_threshold=cell.efficiency_threshold,
        )
    except NonFiniteObjectiveError as exc:
        log.warning("run with seed %d failed: %s", config.seed, exc)
        wall_ms = (time.perf_counter() - started) * 1e3
        return RunRow(**base, A=FAILED, K=FAILED, wall_ms=wall_ms, error=str(exc)), None
    row = RunRow(**base, A=report.accuracy,
                 K="" if cell.efficiency_threshold is None else report.efficiency,
                 wall_ms=report.wall_time * 1e3)
    return row, report


def _run_indexed(args):
    cell, index = args
    return run_one(cell, index)


def run_cell(cell: CellConfig, jobs: int = 1) -> CellResult:
    started = time.perf_counter()
    tasks = [(cell, i) for i in range(cell.runs)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_indexed, tasks))
    else:
        results = [_run_indexed(t) for t in tasks]
    results.sort(key=lambda pair: pair[0].seed)
    rows = [row for row, _ in results]
    reports = [rep for _, rep in results]
    return CellResult(cell, rows, reports, time.perf_counter() - started)


def rows_to_csv(rows: Sequence[RunRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row.csv_values())
    return buf.getvalue()


def write_cell(result: CellResult, out_dir, fmt: str = "both") -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in ("csv", "both"):
        path = out_dir / f"{result.cell.name}.csv"
        path.write_text(rows_to_csv(result.rows))
        written.append(path)
    if fmt in ("json", "both"):
        path = out_dir / f"{result.cell.name}.json"
        path.write_text(json.dumps(result.summary(), indent=2) + "\n")
        written.append(path)
    return written


class CompareError(ValueError):
    pass


def load_summary(path) -> dict:
    with open(path) as f:
        data = json.load(f)
    if data.get("schema_version") != SCHEMA_VERSION:
        raise CompareError(f"{path}: unsupported summary schema {data.get('schema_version')!r}")
    return data


def compare(summaries: Sequence[dict]) -> list[dict]:
    """Side-by-side min/mean/max rows, one per summary, checked for comparability."""
    if len(summaries) < 2:
        raise CompareError("compare needs at least two summaries")
    reference = summaries[0]["config"]
    for other in summaries[1:]:
        cfg = other["config"]
        diff = [f for f in COMPARABLE_FIELDS if cfg.get(f) != reference.get(f)]
        if diff:
            detail = ", ".join(f"{f}: {reference.get(f)!r} vs {cfg.get(f)!r}" for f in diff)
            raise CompareError(f"summaries are not comparable ({detail})")
    table = []
    for s in summaries:
        acc = s.get("accuracy") or {}
        eff = s.get("efficiency") or {}
        table.append({
            "variant": s["variant"],
            "objective": s["objective"],
            "A_min": acc.get("min"),
            "A_mean": acc.get("mean"),
            "A_max": acc.get("max"),
            "K_min": eff.get("min"),
            "K_mean": eff.get("mean"),
            "K_max": eff.get("max"),
            "K_not_found": eff.get("not_found"),
        })
    return table


def compare_csv(table: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(table[0]), lineterminator="\n")
    writer.writeheader()
    for row in table:
        writer.writerow({k: "" if v is None else v for k, v in row.items()})
    return buf.getvalue()


def compare_text(table: list[dict]) -> str:
    """Transposed table: one column per variant, one row per statistic."""

    def cell(v):
        if v is None:
            return "-"
        if isinstance(v, float):
            return f"{v:.4g}"
        return str(v)

    stats = [k for k in table[0] if k not in ("variant", "objective")]
    headers = [row["variant"].upper() for row in table]
    width = max(12, *(len(h) for h in headers))
    lines = [f"objective: {table[0]['objective']}",
             " " * 12 + "".join(h.rjust(width) for h in headers)]
    for stat in stats:
        lines.append(stat.ljust(12) + "".join(cell(row[stat]).rjust(width) for row in table))
    return "\n".join(lines) + "\n"
