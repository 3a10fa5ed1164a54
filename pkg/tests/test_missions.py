"""Geofence geometry, the balloon-hunt mission and the chase mission."""

from __future__ import annotations

import math

import numpy as np
import pytest

from uavhunt.hypothesis_filter import BalloonDetection, WorldModel
from uavhunt.mission import (
    BalloonMission,
    ChaseMission,
    ChaseParams,
    Geofence,
    MissionParams,
    Rect,
    must_brake,
)
from uavhunt.mission.balloon import creeping_line
from uavhunt.target_filter import TargetEstimate
from uavhunt.traj_sync import VehicleState

ARENA = Rect(-45.0, 45.0, -20.0, 20.0)
FENCE = Geofence(Rect(-44.0, 44.0, -19.0, 19.0))
NOTCHED = Geofence(Rect(-44.0, 44.0, -19.0, 19.0), keepouts=(Rect(28.0, 45.0, 12.5, 20.0),))
CHASE_FENCE = Geofence(Rect(-44.0, 44.0, -19.0, 19.0), 3.0, 9.0)
TICK = 0.02


def world_with(*balloons, origin=(0.0, 0.0, 4.0)) -> WorldModel:
    """A world model in which every balloon is already confirmed."""
    w = WorldModel()
    for k in range(8):
        for b in balloons:
            w.ingest(BalloonDetection.towards(origin, b, timestamp=k))
    return w


def estimate(pos, vel, sigma=0.1) -> TargetEstimate:
    return TargetEstimate(np.asarray(pos, float), np.asarray(vel, float), np.eye(6) * sigma**2)


class TestGeofence:
    def test_clamp_inside_untouched(self):
        q, moved = FENCE.clamp((1.0, 2.0, 4.0))
        assert not moved and q == pytest.approx((1.0, 2.0, 4.0))

    def test_clamp_to_box_and_corridor(self):
        q, moved = FENCE.clamp((60.0, -30.0, 9.0))
        assert moved and q == pytest.approx((44.0, -19.0, 5.0))

    def test_clamp_out_of_keepout(self):
        q, moved = NOTCHED.clamp((30.0, 17.0, 4.0))
        assert moved and q == pytest.approx((28.0, 17.0, 4.0))
        assert NOTCHED.contains(q)

    def test_contains(self):
        assert FENCE.contains((0.0, 0.0, 4.0))
        assert not FENCE.contains((0.0, 0.0, 2.0))
        assert not NOTCHED.contains((35.0, 15.0, 4.0))

    def test_path_clear(self):
        assert NOTCHED.path_clear((0.0, 0.0), (40.0, 7.0))
        assert not NOTCHED.path_clear((40.0, 7.0), (23.0, 15.5))
        assert NOTCHED.path_clear((0.0, 15.0), (27.9, 15.0))

    def test_distance_to_boundary(self):
        assert FENCE.distance_to_boundary((0.0, 0.0, 4.0), (1.0, 0.0)) == pytest.approx(44.0)
        assert FENCE.distance_to_boundary((0.0, 0.0, 4.0), (0.0, -2.0)) == pytest.approx(19.0)
        assert FENCE.distance_to_boundary((0.0, 0.0, 4.0), (1.0, 1.0)) == pytest.approx(19.0 * math.sqrt(2))
        assert NOTCHED.distance_to_boundary((20.0, 15.0, 4.0), (1.0, 0.0)) == pytest.approx(8.0, abs=1e-9)
        assert math.isinf(FENCE.distance_to_boundary((0.0, 0.0, 4.0), (0.0, 0.0)))

    def test_bad_geometry(self):
        with pytest.raises(ValueError):
            Rect(1.0, 1.0, 0.0, 2.0)
        with pytest.raises(ValueError):
            Geofence(ARENA, 5.0, 3.0)


class TestMustBrake:
    def test_example(self):
        fence = Geofence(Rect(-44.0, 12.0, -19.0, 19.0))
        # 10 m/s needs 12.5 m at 4 m/s^2, only 12 m remain
        assert must_brake((0.0, 0.0, 4.0), (10.0, 0.0, 0.0), fence, 4.0)
        assert not must_brake((-1.0, 0.0, 4.0), (10.0, 0.0, 0.0), fence, 4.0)

    def test_at_rest_never_brakes(self):
        assert not must_brake((43.9, 0.0, 4.0), (0.0, 0.0, 0.0), FENCE, 4.0)

    def test_moving_away_from_near_wall(self):
        assert not must_brake((43.0, 0.0, 4.0), (-5.0, 0.0, 0.0), FENCE, 4.0)


class TestBalloonMission:
    def _ticks(self, mission, uav, n, t0=0.0):
        out = []
        for k in range(n):
            out.append((mission.tick(t0 + k * TICK, uav), mission.state))
        return out

    def test_takeoff_climbs_in_place(self):
        m = BalloonMission(MissionParams(), ARENA, FENCE, WorldModel())
        wp = m.tick(0.0, VehicleState.at(-40.0, -15.0, 0.0, yaw=0.5))
        assert m.state == "Takeoff"
        assert wp.position == pytest.approx((-40.0, -15.0, 4.0))
        assert wp.yaw == 0.5

    def test_search_heads_to_nearest_lane_corner(self):
        m = BalloonMission(MissionParams(), ARENA, FENCE, WorldModel())
        (_, s0), (wp, s1) = self._ticks(m, VehicleState.at(30.0, 8.0, 4.0), 2)
        assert (s0, s1) == ("Search", "Search")
        assert wp.position == pytest.approx((35.0, 10.0, 4.0))
        assert wp.max_speed == MissionParams().search_speed

    def test_creeping_line_follows_long_side(self):
        pts = creeping_line(ARENA, 10.0, 4.0)
        assert [tuple(p[:2]) for p in pts] == [(-35.0, -10.0), (35.0, -10.0), (35.0, 10.0), (-35.0, 10.0)]
        tall = creeping_line(Rect(-20.0, 20.0, -45.0, 45.0), 10.0, 4.0)
        assert tall[0][:2] == pytest.approx((-10.0, -35.0)) and tall[1][:2] == pytest.approx((-10.0, 35.0))

    def test_pop_after_debounce_approaches_behind_and_above(self):
        m = BalloonMission(MissionParams(), ARENA, FENCE, world_with((10.0, 0.0, 2.8)))
        states = [s for _, s in self._ticks(m, VehicleState.at(0.0, 0.0, 4.0), 6)]
        # one tick to take off, three confirmed ticks in Search, then the attempt
        assert states == ["Search", "Search", "Search", "Pop", "Pop", "Pop"]
        wp = m.ctx.waypoint
        assert wp.position == pytest.approx((8.0, 0.0, 3.5))
        assert wp.yaw == pytest.approx(0.0)
        assert len(m.ctx.attempts) == 1 and m.ctx.attempts[0].outcome == ""

    def test_pass_continues_to_exit(self):
        m = BalloonMission(MissionParams(), ARENA, FENCE, world_with((10.0, 0.0, 2.8)))
        self._ticks(m, VehicleState.at(0.0, 0.0, 4.0), 5)
        wp = m.tick(1.0, VehicleState.at(8.0, 0.0, 3.5))
        assert wp.position == pytest.approx((13.0, 0.0, 3.5))

    @pytest.mark.parametrize("strategy, after", [("star", "ReturnToCenter"), ("direct", "Pop")])
    def test_after_pop(self, strategy, after):
        world = world_with((10.0, 0.0, 2.8), (20.0, 10.0, 2.8))
        m = BalloonMission(MissionParams(strategy=strategy), ARENA, FENCE, world)
        self._ticks(m, VehicleState.at(0.0, 0.0, 4.0), 5)
        m.tick(1.0, VehicleState.at(8.0, 0.0, 3.5))
        m.tick(1.02, VehicleState.at(10.0, 0.0, 3.5))
        if strategy == "star":
            m.tick(1.04, VehicleState.at(13.0, 0.0, 3.5))
        assert m.state == after
        assert m.ctx.popped == 1 and m.ctx.attempts[0].outcome == "popped"
        wp = m.tick(1.1, VehicleState.at(13.0, 0.0, 3.5))
        if strategy == "star":
            assert wp.position == pytest.approx((0.0, 0.0, 4.0))
        else:
            # the next approach lies 2 m short of the second balloon, on the line from where the attempt began
            d = np.array([1.0, 1.0]) / math.sqrt(2.0)
            assert wp.position[:2] == pytest.approx(np.array([20.0, 10.0]) - 2.0 * d)

    def test_lost_target_cancels(self):
        world = world_with((10.0, 0.0, 2.8))
        m = BalloonMission(MissionParams(), ARENA, FENCE, world)
        self._ticks(m, VehicleState.at(0.0, 0.0, 4.0), 5)
        world.remove(world.hypotheses[0].uid)
        m.tick(1.0, VehicleState.at(5.0, 0.0, 4.0))
        assert m.ctx.attempts[0].outcome == "canceled"
        assert m.ctx.popped == 0
        assert any("canceled" in e.detail for e in m.ctx.monitor.log)

    def test_lands_when_all_popped(self):
        m = BalloonMission(MissionParams(expected_balloons=1), ARENA, FENCE, world_with((10.0, 0.0, 2.8)))
        self._ticks(m, VehicleState.at(0.0, 0.0, 4.0), 5)
        m.tick(1.0, VehicleState.at(8.0, 0.0, 3.5))
        m.tick(1.02, VehicleState.at(10.0, 0.0, 3.5))
        m.tick(1.04, VehicleState.at(13.0, 0.0, 3.5))
        assert m.state == "Land" and m.finished

    def test_waypoints_are_fenced(self):
        m = BalloonMission(MissionParams(), ARENA, FENCE, world_with((44.5, 0.0, 2.8), origin=(30.0, 0.0, 4.0)))
        for k in range(6):
            wp = m.tick(k * TICK, VehicleState.at(30.0, 0.0, 4.0))
            assert FENCE.contains(wp.position)
        # the exit point 3 m past the balloon lies outside the fence
        wp = m.tick(1.0, VehicleState.at(42.5, 0.0, 3.5))
        assert wp.position == pytest.approx((44.0, 0.0, 3.5))
        assert m.ctx.fenced.clamps == 1
        assert any(e.detail.startswith("geofence clamp") for e in m.ctx.monitor.log)

    def test_bad_params(self):
        with pytest.raises(ValueError):
            MissionParams(strategy="spiral")
        with pytest.raises(ValueError):
            MissionParams(pop_radius=0.0)


class TestBalloonRun:
    def test_route_inside_fence(self, grand_challenge_run):
        sc, _, _, sim = grand_challenge_run
        assert sim.mission.ctx.route
        assert all(sc.fence.contains(p) for _, p in sim.mission.ctx.route)

    def test_star_never_flies_balloon_to_balloon(self, grand_challenge_run):
        _, trace, _, _ = grand_challenge_run
        entered = [e.state for e in trace.events if e.kind == "entered"]
        for a, b in zip(entered, entered[1:]):
            if a == "Pop":
                assert b in ("ReturnToCenter", "Land")

    def test_entries_and_exits_pair_up(self, grand_challenge_run):
        _, trace, _, _ = grand_challenge_run
        stack = []
        for e in trace.events:
            if e.kind == "entered":
                assert not stack
                stack.append(e.state)
            elif e.kind == "exited":
                assert stack.pop() == e.state
        # only the final state is left open
        assert stack == ["Land"]

    def test_every_attempt_resolved(self, grand_challenge_run):
        _, _, _, sim = grand_challenge_run
        assert all(a.outcome in ("popped", "missed", "canceled") for a in sim.mission.ctx.attempts)
        assert all(a.end >= a.start for a in sim.mission.ctx.attempts)


class TestChaseMission:
    def _airborne(self, params=ChaseParams(corner=(-33.0, 16.0, 6.0))):
        m = ChaseMission(params, CHASE_FENCE)
        at = VehicleState.at(*params.corner)
        m.tick(0.0, at, None, math.inf)
        assert m.state == "WaitAtCorner"
        return m, at

    def test_no_estimate_holds_corner(self):
        m, at = self._airborne()
        for k in range(50):
            wp = m.tick(0.02 * (k + 1), at, None, math.inf)
        assert m.state == "WaitAtCorner"
        assert wp.position == pytest.approx((-33.0, 16.0, 6.0))
        # faces the field center
        assert wp.yaw == pytest.approx(math.atan2(-16.0, 33.0))

    def test_oncoming_ball_is_not_chased(self):
        m, at = self._airborne()
        m.tick(0.02, at, estimate((-25.0, 10.0, 7.5), (-8.0, 6.0, 0.0)), 0.0)
        assert m.state == "WaitAtCorner"

    def test_uncertain_velocity_is_not_chased(self):
        m, at = self._airborne()
        m.tick(0.02, at, estimate((-25.0, 10.0, 7.5), (8.0, -6.0, 0.0), sigma=3.0), 0.0)
        assert m.state == "WaitAtCorner"

    def test_aim_leads_by_lookahead(self):
        m, at = self._airborne()
        ball = estimate((-25.0, 10.0, 7.5), (8.0, -6.0, 0.0))
        m.tick(0.02, at, ball, 0.0)
        assert m.state == "Chase"
        wp = m.tick(0.04, at, ball, 0.0)
        lead = 0.6
        assert wp.position == pytest.approx((-25.0 + 8.0 * lead, 10.0 - 6.0 * lead, 7.5 - 1.0))

    def test_stale_estimate_returns_to_corner(self):
        m, at = self._airborne()
        ball = estimate((-25.0, 10.0, 7.5), (8.0, -6.0, 0.0))
        m.tick(0.02, at, ball, 0.0)
        m.tick(0.04, at, ball, 2.0)
        assert m.state == "WaitAtCorner"

    def test_brakes_before_fence(self):
        m, _ = self._airborne()
        ball = estimate((-25.0, 10.0, 7.5), (8.0, -6.0, 0.0))
        m.tick(0.02, VehicleState.at(-33.0, 16.0, 6.0), ball, 0.0)
        fast = VehicleState((35.0, 0.0, 6.0), (12.0, 0.0, 0.0))
        m.tick(0.04, fast, ball, 0.0)
        assert m.state == "Brake" and m.ctx.brakes == 1
        wp = m.tick(0.06, fast, ball, 0.0)
        # the 18 m stopping point lies past the fence, so the command is clamped to it
        assert wp.position[0] == pytest.approx(44.0)
        m.tick(0.08, VehicleState.at(43.0, 0.0, 6.0), ball, 0.0)
        assert m.state == "WaitAtCorner"

    def test_bad_params(self):
        with pytest.raises(ValueError):
            ChaseParams(brake_accel=0.0)
