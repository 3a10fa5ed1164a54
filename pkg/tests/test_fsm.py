"""State-graph verification, the FSM runtime and its monitoring channel."""

from __future__ import annotations

import random

import pytest

from uavhunt.mission import balloon_graph, chase_graph, verify
from uavhunt.mission import balloon as balloon_mod
from uavhunt.mission import chase as chase_mod
from uavhunt.mission.fsm import (
    GraphError,
    Machine,
    Monitor,
    MonitorEvent,
    State,
    StateGraph,
    UndeclaredTransition,
    errors,
)

FUZZ_TICKS = 1_000_000


class A(State):
    successors = ("B",)

    def execute(self, ctx):
        ctx.append("A")
        return "B"


class B(State):
    successors = ("A",)

    def execute(self, ctx):
        ctx.append("B")
        return None


class Rogue(State):
    successors = ("A",)

    def execute(self, ctx):
        return "B"


def fuzz_states(template, rng: random.Random):
    """Copies of ``template`` state classes that request random successors, declared or not."""
    names = [cls.state_name() for cls in template] + ["Nowhere"]

    def execute(self, ctx):
        if rng.random() < 0.7:
            return None
        return rng.choice(names)

    return [type(cls.state_name(), (State,), {"successors": cls.successors, "final": cls.final, "execute": execute})
            for cls in template]


class TestVerify:
    def test_cycle_ok(self):
        assert verify(StateGraph.from_dict({"A": ["B"], "B": ["A"]}, "A")) == []

    def test_unknown_successor(self):
        defects = verify(StateGraph.from_dict({"A": ["C"]}, "A"))
        assert [(d.kind, d.state, d.detail) for d in defects] == [("unknown successor", "A", "C")]

    def test_missing_initial(self):
        defects = verify(StateGraph.from_dict({"A": []}, "Z"))
        assert defects[0].kind == "missing initial"

    def test_unreachable_is_warning(self):
        defects = verify(StateGraph.from_dict({"A": [], "B": ["A"]}, "A"))
        assert [(d.kind, d.severity) for d in defects] == [("unreachable", "warning")]
        assert errors(defects) == []

    def test_balloon_graph(self):
        g = balloon_graph()
        assert verify(g) == []
        assert g.states == {"Takeoff", "Search", "Pop", "ReturnToCenter", "Land"}

    def test_chase_graph(self):
        assert verify(chase_graph()) == []

    def test_machine_refuses_defective_graph(self):
        class Broken(State):
            successors = ("Ghost",)

        with pytest.raises(GraphError):
            Machine([Broken()], "Broken")
        with pytest.raises(GraphError):
            Machine([A(), B()], "Missing")


class TestMachine:
    def test_runs_declared_transitions(self):
        trail = []
        m = Machine([A(), B()], "A")
        assert m.tick(trail, 0.0) == "B"
        assert m.tick(trail, 0.02) == "B"
        assert trail == ["A", "B"]

    def test_undeclared_transition_raises(self):
        m = Machine([Rogue(), A(), B()], "Rogue")
        with pytest.raises(UndeclaredTransition):
            m.tick([], 0.0)
        assert m.current == "Rogue"

    def test_manual_request_checked(self):
        m = Machine([A(), B()], "A")
        m.request("B", [], 0.0)
        assert m.current == "B"
        with pytest.raises(UndeclaredTransition):
            m.request("B", [], 0.1)

    def test_events_paired_and_ordered(self):
        trail = []
        m = Machine([A(), B()], "A")
        for k in range(3):
            m.tick(trail, k * 0.02)
        kinds = [(e.kind, e.state) for e in m.monitor.log]
        assert kinds == [("entered", "A"), ("exited", "A"), ("transition", "A"), ("entered", "B")]
        ts = [e.timestamp for e in m.monitor.log]
        assert ts == sorted(ts)

    def test_log_line_format(self):
        ev = MonitorEvent(1.5, "warning", "Pop", "geofence clamp")
        assert ev.to_line() == "t=1.500 kind=warning state=Pop detail=geofence clamp"

    def test_monitor_rejects_time_going_backwards(self):
        mon = Monitor()
        mon.emit("warning", "A", timestamp=2.0)
        with pytest.raises(ValueError):
            mon.emit("warning", "A", timestamp=1.0)

    def test_drain_empties_buffer(self):
        mon = Monitor()
        mon.warning("x")
        mon.warning("y")
        assert [e.detail for e in mon.drain()] == ["x", "y"]
        assert mon.drain() == []


class TestFuzz:
    @pytest.mark.parametrize("template", [balloon_mod.STATE_CLASSES, chase_mod.STATE_CLASSES],
                             ids=["balloon", "chase"])
    def test_never_takes_undeclared_transition(self, template):
        rng = random.Random(2020)
        classes = fuzz_states(template, rng)
        graph = StateGraph.from_states(classes, template[0].state_name())
        machine = Machine([cls() for cls in classes], graph.initial, Monitor(keep_log=False))
        ticks = FUZZ_TICKS // 2
        taken = refused = kept = 0
        for k in range(ticks):
            # a stopped machine enters its initial state before executing it
            before = machine.current or graph.initial
            try:
                after = machine.tick(None, k * 0.02)
            except UndeclaredTransition:
                refused += 1
                assert machine.current == before
                continue
            finally:
                machine.monitor.buffer.clear()
            if after != before:
                assert after in graph.transitions[before]
                taken += 1
            else:
                kept += 1
            if machine.finished:
                machine.current = None
        assert taken > 1000 and refused > 1000
        assert taken + refused + kept == ticks
