from __future__ import annotations

import statistics
import time
from dataclasses import dataclass


@dataclass(frozen=True)
class TimingStats:
    samples: tuple

    @property
    def min(self) -> float:
        return min(self.samples)

    @property
    def median(self) -> float:
        return statistics.median(self.samples)


def time_op(task, repetitions: int = 5, warmup: int = 1) -> TimingStats:
    """Run ``task()`` ``warmup`` times untimed, then ``repetitions`` timed runs."""
    if repetitions < 1:
        raise ValueError("need at least one timed repetition")
    for _ in range(warmup):
        task()
    samples = []
    for _ in range(repetitions):
        t0 = time.perf_counter()
        task()
        samples.append(time.perf_counter() - t0)
    return TimingStats(tuple(samples))
