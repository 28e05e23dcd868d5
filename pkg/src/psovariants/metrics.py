"""Accuracy and efficiency indicators and their aggregation over runs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

NOT_FOUND = "NOT_FOUND"


@dataclass(eq=False)
class RunReport:
    trace: np.ndarray
    best_position: np.ndarray
    best_value: float
    accuracy: float
    efficiency: Optional[int]
    efficiency_threshold: Optional[float]
    seed: int
    variant: str
    objective: str
    config: dict
    wall_time: float = field(default=0.0)

    def __eq__(self, other):
        # wall_time is measurement noise and takes no part in equality
        if not isinstance(other, RunReport):
            return NotImplemented
        return (
            np.array_equal(self.trace, other.trace)
            and np.array_equal(self.best_position, other.best_position)
            and self.best_value == other.best_value
            and self.accuracy == other.accuracy
            and self.efficiency == other.efficiency
            and self.efficiency_threshold == other.efficiency_threshold
            and self.seed == other.seed
            and self.variant == other.variant
            and self.objective == other.objective
            and self.config == other.config
        )


def accuracy(trace: Sequence[float], f_star: float = 0.0) -> float:
    """Final global best minus the known optimum."""
    return float(trace[-1]) - float(f_star)


def efficiency(trace: Sequence[float], a_bar: float) -> Optional[int]:
    """First step whose global best is at or below ``a_bar``.

    Step 0 (the initial swarm) counts. Returns None when the threshold is never
    reached within the trace.
    """
    hits = np.flatnonzero(np.asarray(trace, dtype=float) <= a_bar)
    return int(hits[0]) if hits.size else None


@dataclass(frozen=True)
class Summary:
    """Min/mean/max of A and K over a batch of runs.

    K statistics are taken over the runs that reached the threshold; the runs
    that did not are counted in ``k_not_found``. All K fields are None when no
    threshold was set.
    """

    runs: int
    a_min: float
    a_mean: float
    a_max: float
    k_min: Optional[int] = None
    k_mean: Optional[float] = None
    k_max: Optional[int] = None
    k_not_found: int = 0
    k_threshold: Optional[float] = None

    @property
    def k_max_reported(self):
        """Largest K, or ``NOT_FOUND`` if any run missed the threshold."""
        return NOT_FOUND if self.k_not_found else self.k_max

    def as_dict(self) -> dict:
        return {
            "runs": self.runs,
            "accuracy": {"min": self.a_min, "mean": self.a_mean, "max": self.a_max},
            "efficiency": {
                "threshold": self.k_threshold,
                "min": self.k_min,
                "mean": self.k_mean,
                "max": self.k_max_reported,
                "max_found": self.k_max,
                "not_found": self.k_not_found,
            },
        }


def aggregate(reports: Iterable[RunReport]) -> Summary:
    reports = list(reports)
    if not reports:
        raise ValueError("cannot aggregate an empty list of reports")
    a = np.array([r.accuracy for r in reports], dtype=float)
    thresholds = {r.efficiency_threshold for r in reports}
    if len(thresholds) > 1:
        raise ValueError(f"reports use different efficiency thresholds: {sorted(thresholds)}")
    threshold = thresholds.pop()
    summary = dict(runs=len(reports), a_min=float(a.min()), a_mean=float(a.mean()), a_max=float(a.max()))
    if threshold is None:
        return Summary(**summary)
    found = [r.efficiency for r in reports if r.efficiency is not None]
    return Summary(
        **summary,
        k_min=min(found) if found else None,
        k_mean=float(np.mean(found)) if found else None,
        k_max=max(found) if found else None,
        k_not_found=len(reports) - len(found),
        k_threshold=threshold,
    )
