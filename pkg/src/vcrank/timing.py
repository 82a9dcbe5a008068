"""Wall-clock accounting for the five audit stages."""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass

COMPONENTS = (
    "model_setup",
    "concept_embedding",
    "concept_model_training",
    "directional_derivatives",
    "other",
)


@dataclass(frozen=True)
class TimingBreakdown:
    model_setup: float = 0.0
    concept_embedding: float = 0.0
    concept_model_training: float = 0.0
    directional_derivatives: float = 0.0
    other: float = 0.0

    @property
    def total(self) -> float:
        return sum(self.as_dict().values())

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in COMPONENTS}


class StageTimer:
    """Accumulates monotonic-clock time per named component.

    Time spent between :meth:`start` and :meth:`stop` that falls outside any
    :meth:`section` is booked as ``other``.
    """

    def __init__(self):
        self._acc = dict.fromkeys(COMPONENTS, 0.0)
        self._started: float | None = None
        self._inside = 0.0

    def start(self) -> None:
        self._started = time.perf_counter()
        self._inside = 0.0

    def stop(self) -> None:
        if self._started is None:
            raise RuntimeError("timer was never started")
        elapsed = time.perf_counter() - self._started
        self._acc["other"] += max(elapsed - self._inside, 0.0)
        self._started = None

    @contextmanager
    def section(self, name: str):
        if name not in self._acc:
            raise KeyError(f"unknown timing component {name!r}")
        t0 = time.perf_counter()
        try:
            yield
        finally:
            dt = time.perf_counter() - t0
            self._acc[name] += dt
            self._inside += dt

    def breakdown(self) -> TimingBreakdown:
        return TimingBreakdown(**self._acc)


class _NullTimer:
    @contextmanager
    def section(self, name: str):
        yield


NULL_TIMER = _NullTimer()
