"""
Event-driven simulation kernel: clock, event calendar, dispatch and
snapshot/restore.

The kernel dispatches each event to `model.handle(event)`. Calendar order is
(time, sequence); the sequence counter makes same-time events FIFO.
"""

import copy
import heapq
import logging
import math
from dataclasses import dataclass, field

from phc_hfa.errors import SchedulingError
from phc_hfa.sim.streams import RngStreams

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class Event:
    time: float
    sequence: int
    kind: str = field(compare=False)
    facility: int = field(compare=False, default=-1)
    entity: int = field(compare=False, default=-1)
    station: str = field(compare=False, default="-")

    def trace_line(self):
        return f"{self.time:.6f}\t{self.sequence}\t{self.kind}\t{self.entity}\t{self.station}\t{self.facility}"


@dataclass
class Snapshot:
    """Deep copy of clock, calendar, sequence counter, streams and model state."""

    clock: float
    state: dict
    # id of the kernel the snapshot was taken from
    origin: int = 0
    kept: tuple = ()


class Kernel:
    def __init__(self, streams=None, start=0.0, trace=None):
        self.clock = float(start)
        self.streams = streams if streams is not None else RngStreams(0)
        self.model = None
        self.trace = trace
        self._calendar = []
        self._sequence = 0

    def bind(self, model):
        self.model = model
        return model

    def schedule(self, time, kind, facility=-1, entity=-1, station="-"):
        if time < self.clock:
            raise SchedulingError(f"cannot schedule '{kind}' at {time:.6f}, clock is {self.clock:.6f}")
        event = Event(float(time), self._sequence, kind, facility, entity, station)
        self._sequence += 1
        heapq.heappush(self._calendar, event)
        return event

    def peek(self):
        return self._calendar[0].time if self._calendar else math.inf

    def pending(self, predicate=None):
        """Calendar contents in dispatch order, optionally filtered."""
        events = self._calendar if predicate is None else [e for e in self._calendar if predicate(e)]
        return sorted(events)

    def step(self):
        """Dispatch the next event; returns it, or None when the calendar is empty."""
        if not self._calendar:
            return None
        event = heapq.heappop(self._calendar)
        self.clock = event.time
        if self.trace is not None:
            self.trace.write(event.trace_line() + "\n")
        self.model.handle(event)
        return event

    def run_until(self, until):
        """Dispatch every event with time <= until, then advance the clock to `until`."""
        if until < self.clock:
            raise SchedulingError(f"cannot run back to {until:.6f}, clock is {self.clock:.6f}")
        processed = 0
        while self._calendar and self._calendar[0].time <= until:
            self.step()
            processed += 1
        self.clock = float(until)
        return processed

    def snapshot(self, select=None, model=None, keep=(), streams=True):
        """
        Deep copy of clock, calendar, sequence counter, streams and model.

        `select` keeps only the matching pending events, `model` snapshots
        another object than the bound model (e.g. one facility) and `keep`
        lists objects shared by reference instead of copied. Without
        `streams` a restore keeps the restoring kernel's own streams.
        """
        calendar = self._calendar if select is None else self.pending(select)
        state = {
            "calendar": calendar,
            "sequence": self._sequence,
            "streams": self.streams if streams else None,
            "model": self.model if model is None else model,
        }
        # the kernel itself is kept out of the copy so model back-references stay valid
        kept = tuple(keep)
        memo = {id(self): self, **{id(obj): obj for obj in kept}}
        return Snapshot(self.clock, copy.deepcopy(state, memo), origin=id(self), kept=kept)

    def restore(self, snapshot):
        """
        Replace clock, calendar, streams and model with copies of the
        snapshot's. Restoring into another kernel rebinds every reference to
        the snapshot's kernel onto this one.
        """
        memo = {id(self): self, snapshot.origin: self, **{id(obj): obj for obj in snapshot.kept}}
        state = copy.deepcopy(snapshot.state, memo)
        self.clock = snapshot.clock
        self._calendar = list(state["calendar"])
        heapq.heapify(self._calendar)
        self._sequence = state["sequence"]
        if state["streams"] is not None:
            self.streams = state["streams"]
        self.model = state["model"]
        logger.debug(f"Kernel restored to t={self.clock:.3f} with {len(self._calendar)} pending events")
