"""Compare fresh timings against stored reference timings."""

from __future__ import annotations

import enum
import statistics
from dataclasses import dataclass, field

from .plot import PlotData, loads_csv, read_csv

DEFAULT_REL_TOL = 0.2


class Status(enum.Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    INDETERMINATE = "INDETERMINATE"


def _keyed_medians(data: PlotData) -> dict:
    op = data.metadata.get("op", "")
    fld = data.metadata.get("field", "")
    return {
        (op, name, fld, n): statistics.median(samples)
        for name, pts in data.series.items()
        for n, samples in pts
    }


@dataclass
class RegressionBaseline:
    """Reference timings keyed by (operation, series/matrix class, field, n)."""

    data: PlotData
    rel_tol: float = DEFAULT_REL_TOL

    @property
    def machine(self):
        return self.data.metadata.get("machine")

    @classmethod
    def load(cls, path, rel_tol: float = DEFAULT_REL_TOL) -> "RegressionBaseline":
        return cls(read_csv(path), rel_tol)

    @classmethod
    def loads(cls, text: str, rel_tol: float = DEFAULT_REL_TOL) -> "RegressionBaseline":
        return cls(loads_csv(text), rel_tol)


@dataclass(frozen=True)
class RegressionEntry:
    key: tuple
    baseline: float
    current: float
    ratio: float
    status: Status


@dataclass
class RegressionReport:
    entries: list
    comparable: bool
    status: Status
    notes: list = field(default_factory=list)

    def format(self) -> str:
        lines = [f"{' '.join(map(str, e.key))}: {e.status.value} (ratio {e.ratio:.3f})"
                 for e in self.entries]
        lines.extend(self.notes)
        lines.append(f"overall: {self.status.value}")
        return "\n".join(lines)


def regression_check(current: PlotData, baseline: RegressionBaseline,
                     rel_tol: float | None = None) -> RegressionReport:
    """PASS per key when ``current_median <= baseline_median * (1 + rel_tol)``.

    Different machine tags make the comparison meaningless; the entries are
    still computed but the overall status is INDETERMINATE.
    """
    tol = baseline.rel_tol if rel_tol is None else rel_tol
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    cur = _keyed_medians(current)
    ref = _keyed_medians(baseline.data)
    keys = sorted(cur.keys() & ref.keys())
    if not keys:
        raise ValueError("no (operation, series, field, size) key in common with the baseline")
    entries = []
    for k in keys:
        b, c = ref[k], cur[k]
        ok = c <= b * (1 + tol)
        ratio = c / b if b > 0 else float("inf")
        entries.append(RegressionEntry(k, b, c, ratio, Status.PASS if ok else Status.FAIL))
    notes = []
    comparable = current.metadata.get("machine") == baseline.machine
    if not comparable:
        notes.append(f"machine tags differ: {current.metadata.get('machine')!r} "
                     f"vs baseline {baseline.machine!r}")
        status = Status.INDETERMINATE
    elif all(e.status is Status.PASS for e in entries):
        status = Status.PASS
    else:
        status = Status.FAIL
    return RegressionReport(entries, comparable, status, notes)
