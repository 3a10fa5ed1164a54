"""Mission logic: FSM runtime, geofence and the balloon-hunt and chase missions."""

from .balloon import BalloonMission, MissionParams, balloon_graph
from .chase import ChaseMission, ChaseParams, chase_graph, must_brake
from .fsm import Machine, Monitor, MonitorEvent, State, StateGraph, verify
from .geofence import Geofence, Rect
from .waypoint import Waypoint

__all__ = [
    "BalloonMission",
    "ChaseMission",
    "ChaseParams",
    "Geofence",
    "Machine",
    "MissionParams",
    "Monitor",
    "MonitorEvent",
    "Rect",
    "State",
    "StateGraph",
    "Waypoint",
    "balloon_graph",
    "chase_graph",
    "must_brake",
    "verify",
]
