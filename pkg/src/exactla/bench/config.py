"""Persisted tuning results: ``<operation>.<key> = <value>`` lines.

The file is looked up through the ``XLA_CONFIG`` environment variable and
defaults to ``./xla.conf``. A missing file means built-in defaults.
"""

from __future__ import annotations

import bisect
import os
from dataclasses import dataclass, field

CONFIG_ENV = "XLA_CONFIG"
DEFAULT_CONFIG_PATH = "xla.conf"


@dataclass
class MethodTable:
    """Winning method per measured grid size, for one (operation, class).

    Sizes between grid points take the winner of the nearer point; sizes
    outside the grid take the winner at the nearest end.
    """

    grid: list = field(default_factory=list)
    winners: list = field(default_factory=list)

    def lookup(self, n: int) -> str:
        if not self.grid:
            raise LookupError("empty method table")
        i = bisect.bisect_left(self.grid, n)
        if i == 0:
            return self.winners[0]
        if i == len(self.grid):
            return self.winners[-1]
        lo, hi = self.grid[i - 1], self.grid[i]
        # equidistant sizes go to the smaller grid point
        return self.winners[i - 1] if n - lo <= hi - n else self.winners[i]

    def boundaries(self) -> list:
        """Grid points where the winner changes."""
        return [g for g, a, b in zip(self.grid[1:], self.winners, self.winners[1:]) if a != b]

    def dumps(self) -> str:
        return ",".join(f"{g}:{w}" for g, w in zip(self.grid, self.winners))

    @classmethod
    def loads(cls, text: str) -> "MethodTable":
        grid, winners = [], []
        for item in text.split(","):
            g, w = item.strip().split(":")
            grid.append(int(g))
            winners.append(w.strip())
        order = sorted(range(len(grid)), key=grid.__getitem__)
        return cls([grid[i] for i in order], [winners[i] for i in order])


def parse_config(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or "." not in key:
            raise ValueError(f"line {lineno}: expected '<operation>.<key> = <value>'")
        out[key] = value.strip()
    return out


def dump_config(values: dict) -> str:
    return "".join(f"{k} = {v}\n" for k, v in values.items())


def config_path() -> str:
    return os.environ.get(CONFIG_ENV, DEFAULT_CONFIG_PATH)


def read_config(path: str | None = None) -> dict:
    path = config_path() if path is None else path
    try:
        with open(path) as fh:
            return parse_config(fh.read())
    except FileNotFoundError:
        return {}


def write_config(values: dict, path: str | None = None, merge: bool = True) -> str:
    path = config_path() if path is None else path
    current = read_config(path) if merge else {}
    current.update({k: str(v) for k, v in values.items()})
    with open(path, "w") as fh:
        fh.write(dump_config(current))
    return path


_tuned: dict | None = None


def tuned_config() -> dict:
    """Tuned values, read once on first use."""
    global _tuned
    if _tuned is None:
        _tuned = read_config()
    return _tuned


def set_tuned_config(values: dict | None) -> None:
    """Replace the in-process tuned values (``None`` forces a re-read)."""
    global _tuned
    _tuned = None if values is None else dict(values)


def method_table(operation: str, cls: str = "dense") -> MethodTable | None:
    text = tuned_config().get(f"{operation}.methods.{cls}")
    return MethodTable.loads(text) if text else None
