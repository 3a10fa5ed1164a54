"""Finite-state-machine runtime with up-front graph verification and monitoring.

States are classes that declare their possible successors as a class
attribute, so the full transition graph is known before any state runs.
A :class:`Machine` refuses to start on a defective graph and asserts at
runtime that every transition taken was declared.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import ClassVar, Generic, Iterable, Mapping, TypeVar

__all__ = [
    "State",
    "StateGraph",
    "Defect",
    "verify",
    "MonitorEvent",
    "Monitor",
    "Machine",
    "GraphError",
    "UndeclaredTransition",
]

C = TypeVar("C")
EVENT_KINDS = ("entered", "exited", "transition", "warning")


class GraphError(ValueError):
    """The state graph failed verification."""


class UndeclaredTransition(RuntimeError):
    """A state asked for a successor it did not declare."""


class State(Generic[C]):
    """Base class for mission states.

    Subclasses set ``successors`` and override ``execute``, which returns
    the name of the next state or ``None`` to stay.  Returning the state's
    own name re-enters it and must be declared like any other successor.
    """

    successors: ClassVar[tuple[str, ...]] = ()
    final: ClassVar[bool] = False

    @classmethod
    def state_name(cls) -> str:
        return getattr(cls, "name", None) or cls.__name__

    def enter(self, ctx: C) -> None:
        pass

    def execute(self, ctx: C) -> str | None:
        return None

    def exit(self, ctx: C) -> None:
        pass


@dataclass(frozen=True)
class StateGraph:
    states: frozenset[str]
    transitions: Mapping[str, frozenset[str]]
    initial: str
    final: frozenset[str] = frozenset()

    @classmethod
    def from_states(cls, states: Iterable[type[State]], initial: str) -> "StateGraph":
        states = list(states)
        return cls(
            frozenset(s.state_name() for s in states),
            {s.state_name(): frozenset(s.successors) for s in states},
            initial,
            frozenset(s.state_name() for s in states if s.final),
        )

    @classmethod
    def from_dict(cls, transitions: Mapping[str, Iterable[str]], initial: str) -> "StateGraph":
        return cls(frozenset(transitions), {k: frozenset(v) for k, v in transitions.items()}, initial)

    def reachable(self) -> set[str]:
        seen, todo = set(), [self.initial]
        while todo:
            s = todo.pop()
            if s in seen or s not in self.states:
                continue
            seen.add(s)
            todo.extend(self.transitions.get(s, ()))
        return seen


@dataclass(frozen=True)
class Defect:
    kind: str
    state: str
    detail: str = ""
    severity: str = "error"

    def __str__(self) -> str:
        return f"{self.severity}: {self.kind} at {self.state}" + (f" ({self.detail})" if self.detail else "")


def verify(graph: StateGraph) -> list[Defect]:
    """All defects of ``graph``; an empty list means it may run.

    Unreachable states are reported with severity ``warning``.
    """
    defects = []
    if graph.initial not in graph.states:
        defects.append(Defect("missing initial", graph.initial))
    for s in sorted(graph.states):
        for t in sorted(graph.transitions.get(s, ())):
            if t not in graph.states:
                defects.append(Defect("unknown successor", s, t))
    if graph.initial in graph.states:
        for s in sorted(graph.states - graph.reachable()):
            defects.append(Defect("unreachable", s, severity="warning"))
    return defects


def errors(defects: Iterable[Defect]) -> list[Defect]:
    return [d for d in defects if d.severity == "error"]


@dataclass(frozen=True)
class MonitorEvent:
    timestamp: float
    kind: str
    state: str
    detail: str = ""

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"event kind must be one of {EVENT_KINDS}")

    def to_line(self) -> str:
        return f"t={self.timestamp:.3f} kind={self.kind} state={self.state} detail={self.detail}"


@dataclass
class Monitor:
    """Ordered, buffered event channel.  Producers ``emit``; a consumer ``drain``s."""

    clock: float = 0.0
    state: str = ""
    buffer: deque = field(default_factory=deque)
    log: list = field(default_factory=list)
    keep_log: bool = True

    def emit(self, kind: str, state: str | None = None, detail: str = "", timestamp: float | None = None) -> MonitorEvent:
        t = self.clock if timestamp is None else timestamp
        if self.log and t < self.log[-1].timestamp:
            raise ValueError("monitor events must have nondecreasing timestamps")
        ev = MonitorEvent(t, kind, self.state if state is None else state, detail)
        self.buffer.append(ev)
        if self.keep_log:
            self.log.append(ev)
        return ev

    def warning(self, detail: str) -> MonitorEvent:
        return self.emit("warning", detail=detail)

    def drain(self) -> list[MonitorEvent]:
        out = list(self.buffer)
        self.buffer.clear()
        return out


class Machine(Generic[C]):
    """Runs one state per ``tick``.  Built only from a graph that passes :func:`verify`."""

    def __init__(self, states: Iterable[State[C]], initial: str, monitor: Monitor | None = None):
        self.states = {type(s).state_name(): s for s in states}
        self.graph = StateGraph.from_states((type(s) for s in self.states.values()), initial)
        bad = errors(verify(self.graph))
        if bad:
            raise GraphError("; ".join(map(str, bad)))
        self.monitor = monitor or Monitor()
        self.current: str | None = None
        self.initial = initial
        self.transitions = 0

    @property
    def finished(self) -> bool:
        return self.current is not None and self.current in self.graph.final

    def _enter(self, name: str, ctx: C) -> None:
        self.current = name
        self.monitor.state = name
        self.monitor.emit("entered", name)
        self.states[name].enter(ctx)

    def _switch(self, target: str, ctx: C, detail: str = "") -> None:
        src = self.current
        if target not in self.graph.transitions[src]:
            raise UndeclaredTransition(f"{src} -> {target}")
        self.states[src].exit(ctx)
        self.monitor.emit("exited", src)
        self.monitor.emit("transition", src, f"{src} -> {target}" + (f" {detail}" if detail else ""))
        self.transitions += 1
        self._enter(target, ctx)

    def tick(self, ctx: C, t: float) -> str:
        """Run the active state once at time ``t``; returns the active state name afterwards."""
        self.monitor.clock = t
        if self.current is None:
            self._enter(self.initial, ctx)
        nxt = self.states[self.current].execute(ctx)
        if nxt is not None:
            self._switch(nxt, ctx)
        return self.current

    def request(self, target: str, ctx: C, t: float | None = None) -> None:
        """Manual transition hook; subject to the same declared-successor check."""
        if t is not None:
            self.monitor.clock = t
        if self.current is None:
            self._enter(self.initial, ctx)
        self._switch(target, ctx, "(manual)")
