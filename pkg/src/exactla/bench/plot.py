"""Benchmark series, their CSV exchange format and gnuplot scripts.

CSV layout::

    # op=mul
    # field=zp:65537
    # machine=host
    # timestamp=2024-01-01T00:00:00
    series,n,sample_idx,seconds
    "base",64,0,0.0123

Seconds are written with ``repr`` (shortest round-trip decimal), so a
write/read cycle reproduces the data and the bytes exactly.
"""

from __future__ import annotations

import csv
import enum
import os
import statistics
from dataclasses import dataclass, field

CSV_HEADER = "series,n,sample_idx,seconds"
_META_ORDER = ("op", "field", "machine", "timestamp")


@dataclass
class PlotData:
    """Named series of ``(n, [seconds, ...])`` points plus string metadata."""

    series: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def add(self, name: str, n: int, samples) -> None:
        if not name or any(c in name for c in "\n\r\x00"):
            raise ValueError(f"invalid series name {name!r}")
        pts = self.series.setdefault(name, [])
        if pts and n <= pts[-1][0]:
            raise ValueError(f"sizes in series {name!r} must increase ({n} after {pts[-1][0]})")
        samples = [float(s) for s in samples]
        if not samples:
            raise ValueError("a point needs at least one sample")
        pts.append((int(n), samples))

    def validate(self) -> None:
        for name, pts in self.series.items():
            if not name or any(c in name for c in "\n\r\x00"):
                raise ValueError(f"invalid series name {name!r}")
            if not pts:
                raise ValueError(f"series {name!r} is empty")
            ns = [n for n, _ in pts]
            if any(b <= a for a, b in zip(ns, ns[1:])):
                raise ValueError(f"sizes in series {name!r} must increase")
            if any(not s for _, s in pts):
                raise ValueError(f"series {name!r} has a point without samples")

    def sizes(self, name: str) -> list:
        return [n for n, _ in self.series[name]]

    def medians(self, name: str) -> list:
        return [statistics.median(s) for _, s in self.series[name]]


class OutputKind(enum.Enum):
    CSV = "csv"
    GNUPLOT = "gnuplot"


@dataclass
class PlotStyle:
    kind: OutputKind = OutputKind.CSV
    xlabel: str = "n"
    ylabel: str = "seconds"
    logx: bool = False
    logy: bool = False
    title: str = ""

    def __post_init__(self):
        self.kind = OutputKind(self.kind)


def _quote(name: str) -> str:
    return '"' + name.replace('"', '""') + '"'


def dumps_csv(data: PlotData) -> str:
    data.validate()
    lines = []
    keys = [k for k in _META_ORDER if k in data.metadata]
    keys += sorted(k for k in data.metadata if k not in _META_ORDER)
    for k in keys:
        v = str(data.metadata[k])
        if "\n" in v or "=" in k:
            raise ValueError(f"metadata {k!r} cannot be written on one line")
        lines.append(f"# {k}={v}")
    lines.append(CSV_HEADER)
    for name, pts in data.series.items():
        q = _quote(name)
        for n, samples in pts:
            lines.extend(f"{q},{n},{i},{s!r}" for i, s in enumerate(samples))
    return "\n".join(lines) + "\n"


def loads_csv(text: str) -> PlotData:
    meta = {}
    body = []
    header_seen = False
    for lineno, line in enumerate(text.split("\n"), 1):
        if not header_seen:
            if line.startswith("#"):
                key, sep, value = line[1:].strip().partition("=")
                if not sep:
                    raise ValueError(f"line {lineno}: metadata must be '# key=value'")
                meta[key.strip()] = value
                continue
            if line.strip() != CSV_HEADER:
                raise ValueError(f"line {lineno}: expected header {CSV_HEADER!r}")
            header_seen = True
            continue
        if line.strip():
            body.append((lineno, line))
    if not header_seen:
        raise ValueError("missing CSV header")
    data = PlotData(metadata=meta)
    current = {}
    for lineno, line in body:
        row = next(csv.reader([line]))
        if len(row) != 4:
            raise ValueError(f"line {lineno}: expected 4 fields")
        name, n, idx, secs = row[0], int(row[1]), int(row[2]), float(row[3])
        key = (name, n)
        if key not in current:
            if idx != 0:
                raise ValueError(f"line {lineno}: sample indices must start at 0")
            data.add(name, n, [secs])
            current[key] = data.series[name][-1][1]
        else:
            if idx != len(current[key]):
                raise ValueError(f"line {lineno}: sample index out of order")
            current[key].append(secs)
    return data


def read_csv(path) -> PlotData:
    with open(path) as fh:
        return loads_csv(fh.read())


def gnuplot_script(data: PlotData, style: PlotStyle, csv_path: str) -> str:
    lines = ['set datafile separator ","']
    if style.title:
        lines.append(f'set title "{style.title}"')
    lines.append(f'set xlabel "{style.xlabel}"')
    lines.append(f'set ylabel "{style.ylabel}"')
    if style.logx:
        lines.append("set logscale x 2")
    if style.logy:
        lines.append("set logscale y")
    lines.append("set key left top")
    plots = []
    for name in data.series:
        sel = name.replace('"', '\\"')
        plots.append(
            f'"{csv_path}" every ::1 using 2:(strcol(1) eq "{sel}" ? $4 : 1/0) '
            f'with linespoints title "{sel}"'
        )
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def plot_emit(data: PlotData, style: PlotStyle, csv_path, script_path=None) -> list:
    """Write the CSV (always) and, for gnuplot output, a script plotting it."""
    written = []
    text = dumps_csv(data)
    with open(csv_path, "w", newline="\n") as fh:
        fh.write(text)
    written.append(os.fspath(csv_path))
    if style.kind is OutputKind.GNUPLOT:
        if script_path is None:
            script_path = os.path.splitext(os.fspath(csv_path))[0] + ".gp"
        with open(script_path, "w", newline="\n") as fh:
            fh.write(gnuplot_script(data, style, os.path.basename(os.fspath(csv_path))))
        written.append(os.fspath(script_path))
    return written


__all__ = [
    "CSV_HEADER",
    "OutputKind",
    "PlotData",
    "PlotStyle",
    "dumps_csv",
    "gnuplot_script",
    "loads_csv",
    "plot_emit",
    "read_csv",
]
