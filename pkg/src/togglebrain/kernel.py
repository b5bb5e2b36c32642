"""Deterministic discrete-event kernel.

Time is an integer tick count (1 tick = 1 simulated microsecond). Events are
bare pulses on named lines; pop order is (time, insertion sequence).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable, Iterable, TextIO

DEFAULT_HORIZON = 10**12


class RunAborted(RuntimeError):
    """Raised when an event would land past the configured horizon."""


@dataclass(frozen=True, slots=True)
class LineId:
    id: int
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, order=True, slots=True)
class PulseEvent:
    time: int
    sequence: int
    line: LineId


Sink = Callable[[int, LineId], None]


class EventQueue:
    """Priority queue of pulse events with a monotone clock.

    If ``record`` is true, every delivered event is appended to ``log`` as
    ``(tick, line name)``.
    """

    def __init__(self, horizon: int = DEFAULT_HORIZON, record: bool = False):
        if horizon < 0:
            raise ValueError("horizon must be non-negative")
        self.horizon = horizon
        self.now = 0
        self.record = record
        self.log: list[tuple[int, str]] = []
        self._heap: list[PulseEvent] = []
        self._seq = 0
        self._lines: dict[str, LineId] = {}

    def line(self, name: str) -> LineId:
        """Return the line called ``name``, creating it on first use."""
        try:
            return self._lines[name]
        except KeyError:
            lid = LineId(len(self._lines), name)
            self._lines[name] = lid
            return lid

    def __len__(self) -> int:
        return len(self._heap)

    def peek_time(self) -> int | None:
        return self._heap[0].time if self._heap else None

    def schedule(self, delay: int, line: LineId) -> PulseEvent:
        if delay < 0:
            raise ValueError(f"negative delay {delay}")
        t = self.now + delay
        if t > self.horizon:
            raise RunAborted(f"event on {line.name} at tick {t} exceeds horizon {self.horizon}")
        ev = PulseEvent(t, self._seq, line)
        self._seq += 1
        heapq.heappush(self._heap, ev)
        return ev

    def step(self) -> tuple[int, LineId] | None:
        """Pop the earliest event and advance ``now`` to it; None if empty."""
        if not self._heap:
            return None
        ev = heapq.heappop(self._heap)
        self.now = ev.time
        if self.record:
            self.log.append((ev.time, ev.line.name))
        return ev.time, ev.line

    def run_until(self, t: int, sink: Sink | None = None) -> None:
        """Deliver every event with time <= t, including ones scheduled by
        ``sink`` during delivery, then set ``now = t``."""
        if t < self.now:
            raise ValueError(f"cannot run backwards to {t} from {self.now}")
        while self._heap and self._heap[0].time <= t:
            time, line = self.step()
            if sink is not None:
                sink(time, line)
        self.now = t

    def run(self, sink: Sink | None = None) -> None:
        """Drain the queue."""
        while self._heap:
            time, line = self.step()
            if sink is not None:
                sink(time, line)

    def write_log(self, fp: TextIO) -> None:
        for tick, name in self.log:
            fp.write(f"{tick}\t{name}\n")


def format_log(entries: Iterable[tuple[int, str]]) -> str:
    return "".join(f"{tick}\t{name}\n" for tick, name in entries)


def parse_log(text: str) -> list[tuple[int, str]]:
    out = []
    for line in text.splitlines():
        if not line:
            continue
        tick, name = line.split("\t", 1)
        out.append((int(tick), name))
    return out


def replay(entries: Iterable[tuple[int, str]], horizon: int = DEFAULT_HORIZON) -> EventQueue:
    """Schedule a recorded log into a fresh queue and step it to exhaustion.

    The returned queue's ``log`` reproduces ``entries`` when they were a
    valid delivery order.
    """
    q = EventQueue(horizon=horizon, record=True)
    for tick, name in entries:
        q.schedule(tick, q.line(name))
    q.run()
    return q
