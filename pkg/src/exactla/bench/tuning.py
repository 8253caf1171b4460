"""Threshold discovery from fitted cost curves, and per-size method choice.

The crossover between the base product and one recursion level is found by
fitting each timing series to its cost model and bisecting the difference
of the fitted curves:

* base:       ``t = a*n**3 + b*n**2``
* recursive:  ``t = c*n**log2(7) + e*n**2``

Fits minimise relative error and are reweighted with Tukey's biweight so a
few wild samples do not move the curves.
"""

from __future__ import annotations

import math
import statistics
import warnings
from dataclasses import dataclass, field

import numpy as np

from .config import MethodTable
from .plot import PlotData

LOG2_7 = math.log2(7)
BASE_EXPONENTS = (3.0, 2.0)
RECURSIVE_EXPONENTS = (LOG2_7, 2.0)
MIN_POINTS = 4


class TuningError(ValueError):
    """Input timings cannot support a decision."""


class DegenerateFitError(TuningError):
    def __init__(self, series: str, reason: str):
        super().__init__(f"degenerate fit for series {series!r}: {reason}")
        self.series = series


@dataclass(frozen=True)
class CurveFit:
    exponents: tuple
    coeffs: tuple
    residuals: tuple  # relative, (fitted - measured) / measured

    def __call__(self, n):
        n = np.asarray(n, dtype=float)
        return sum(c * n**e for c, e in zip(self.coeffs, self.exponents))


@dataclass
class TuneResult:
    threshold: int
    crossover: float | None
    fits: dict = field(default_factory=dict)
    method_table: MethodTable = field(default_factory=MethodTable)

    @property
    def residuals(self) -> dict:
        return {name: f.residuals for name, f in self.fits.items()}


def _medians(series) -> tuple:
    if isinstance(series, dict):
        series = sorted(series.items())
    ns, meds = [], []
    for n, s in series:
        ns.append(int(n))
        meds.append(statistics.median(s) if np.ndim(s) else float(s))
    return ns, meds


def fit_curve(ns, ts, exponents, name: str = "series", iterations: int = 20) -> CurveFit:
    """Robust least-squares fit of ``t = sum c_i * n**e_i`` on relative error."""
    n = np.asarray(ns, dtype=float)
    t = np.asarray(ts, dtype=float)
    if not np.all(np.isfinite(t)) or np.any(t <= 0):
        raise DegenerateFitError(name, "timings must be positive and finite")
    X = np.stack([n**e for e in exponents], axis=1) / t[:, None]
    scale = np.linalg.norm(X, axis=0)
    if np.any(scale == 0):
        raise DegenerateFitError(name, "a model term vanishes on the grid")
    Xs = X / scale
    if np.linalg.matrix_rank(Xs) < len(exponents):
        raise DegenerateFitError(name, "singular normal equations")
    y = np.ones_like(t)
    w = np.ones_like(t)
    for _ in range(iterations):
        sw = np.sqrt(w)
        beta, *_ = np.linalg.lstsq(Xs * sw[:, None], y * sw, rcond=None)
        r = Xs @ beta - y
        mad = np.median(np.abs(r - np.median(r)))
        if mad < 1e-12:
            break
        u = r / (4.685 * 1.4826 * mad)
        w_new = np.where(np.abs(u) < 1, (1 - u**2) ** 2, 0.0)
        if np.count_nonzero(w_new) < len(exponents) or np.allclose(w_new, w):
            break
        w = w_new
    coeffs = tuple(float(c) for c in beta / scale)
    fit = CurveFit(tuple(exponents), coeffs, ())
    rel = tuple(float(v) for v in (fit(n) - t) / t)
    return CurveFit(tuple(exponents), coeffs, rel)


def _nearest(grid, x: float) -> int:
    # equidistant: the larger point, which keeps the base case at equality
    return min(grid, key=lambda g: (abs(g - x), -g))


def _bisect(f, lo: float, hi: float, steps: int = 100) -> float:
    flo = f(lo)
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < 1e-9 * hi:
            break
    return 0.5 * (lo + hi)


def tune_threshold(base_series, recursive_series, names=("base", "recursive")) -> TuneResult:
    """Crossover size where the fitted recursive curve drops below the base one.

    Each series is a sequence of ``(n, samples)`` pairs (or a ``{n: samples}``
    mapping); medians are fitted. Rules when the curves do not cross inside
    the grid: recursion never wins -> largest grid size; recursion wins
    everywhere -> smallest grid size. Identical series give the smallest
    grid size.
    """
    bn, bt = _medians(base_series)
    rn, rt = _medians(recursive_series)
    if bn != rn:
        raise TuningError("base and recursive series must share the same size grid")
    if len(bn) < MIN_POINTS:
        raise TuningError(f"need at least {MIN_POINTS} grid points, got {len(bn)}")
    if any(b <= a for a, b in zip(bn, bn[1:])):
        raise TuningError("grid sizes must increase")
    grid = bn
    fb = fit_curve(grid, bt, BASE_EXPONENTS, names[0])
    fr = fit_curve(grid, rt, RECURSIVE_EXPONENTS, names[1])
    fits = {names[0]: fb, names[1]: fr}

    def diff(x):
        return float(fr(x) - fb(x))

    lo, hi = float(grid[0]), float(grid[-1])
    xs = np.unique(np.concatenate([np.geomspace(lo, hi, 1024), np.asarray(grid, dtype=float)]))
    d = np.array([diff(x) for x in xs])
    tiny = 1e-9 * np.maximum(np.abs(fb(xs)), np.abs(fr(xs)))
    crossover = None
    if np.all(np.abs(d) <= tiny) or np.array_equal(bt, rt):
        threshold = grid[0]
    elif d[0] < -tiny[0]:
        threshold = grid[0]
    else:
        below = np.nonzero(d < -tiny)[0]
        if below.size == 0:
            threshold = grid[-1]
        else:
            i = int(below[0])
            crossover = _bisect(diff, float(xs[i - 1]), float(xs[i]))
            threshold = _nearest(grid, crossover)
    table = MethodTable(list(grid), ["base" if g <= threshold else "winograd" for g in grid])
    return TuneResult(int(threshold), crossover, fits, table)


def tune_from_plot(data: PlotData, base: str = "base", recursive: str = "recursive") -> TuneResult:
    return tune_threshold(data.series[base], data.series[recursive], (base, recursive))


@dataclass
class MethodSelection:
    operation: str
    tables: dict  # matrix class -> MethodTable
    excluded: dict = field(default_factory=dict)  # candidate -> error text

    def config_values(self) -> dict:
        return {f"{self.operation}.methods.{cls}": t.dumps() for cls, t in self.tables.items()}


def select_method(solution: str, candidates, grid, runner, classes=("dense",)) -> MethodSelection:
    """Bench every candidate and keep, per size and class, the fastest median.

    ``runner(candidate, sizes, classes)`` returns a :class:`PlotData` whose
    series are named by matrix class. Candidates whose runner raises are
    dropped with a warning.
    """
    candidates = list(candidates)
    if not candidates:
        raise TuningError("no candidate methods")
    sizes = sorted(int(n) for n in grid)
    results, excluded = {}, {}
    for cand in candidates:
        try:
            results[cand] = runner(cand, sizes, tuple(classes))
        except Exception as exc:  # noqa: BLE001 - any failure disqualifies the candidate
            excluded[cand] = f"{type(exc).__name__}: {exc}"
            warnings.warn(f"candidate {cand!r} excluded: {exc}", RuntimeWarning, stacklevel=2)
    if not results:
        raise TuningError(f"every candidate failed for {solution!r}")
    tables = {}
    for cls in classes:
        winners = []
        for n in sizes:
            best, best_t = None, math.inf
            for cand, data in results.items():  # candidate order breaks ties
                pts = dict(data.series.get(cls, []))
                if n in pts:
                    t = statistics.median(pts[n])
                    if t < best_t:
                        best, best_t = cand, t
            if best is None:
                raise TuningError(f"no timing for class {cls!r} at n={n}")
            winners.append(best)
        tables[cls] = MethodTable(sizes, winners)
    return MethodSelection(solution, tables, excluded)
