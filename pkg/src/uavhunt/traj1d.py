"""Jerk-limited time-optimal trajectories for a single triple-integrator axis.

A profile is a sequence of constant-jerk segments.  Position, velocity and
acceleration are continuous by construction: acceleration is piecewise
linear, velocity piecewise quadratic and position piecewise cubic.

The time-optimal planner enumerates the bang-bang profile families that can
be optimal for the constrained triple integrator (jerk pattern up/down/up
with optional constant-acceleration and cruise phases, in both directions),
solves each family for its switching times and keeps the fastest profile
that respects every limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "AxisState",
    "AxisLimits",
    "MotionProfile",
    "PlanningError",
    "InfeasibleGoal",
    "TimeTooShort",
    "TABLE1_XY",
    "TABLE1_Z",
    "plan_time_optimal",
    "plan_fixed_time",
    "retime_if_cruising",
    "sample",
]

ROOT_TOL = 1e-9
STATE_TOL = 1e-7


class PlanningError(ValueError):
    """Base class for planner failures."""


class InfeasibleGoal(PlanningError):
    """The goal state violates the limits or cannot be reached."""


class TimeTooShort(PlanningError):
    """Requested duration is below the time-optimal duration."""


@dataclass(frozen=True)
class AxisState:
    position: float
    velocity: float = 0.0
    acceleration: float = 0.0

    def __post_init__(self):
        if not all(map(math.isfinite, (self.position, self.velocity, self.acceleration))):
            raise ValueError(f"non-finite axis state {self}")

    def reversed(self) -> "AxisState":
        """State seen when running time backwards (velocity flips sign)."""
        return AxisState(self.position, -self.velocity, self.acceleration)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.position, self.velocity, self.acceleration)


@dataclass(frozen=True)
class AxisLimits:
    v_min: float
    v_max: float
    a_min: float
    a_max: float
    j_min: float
    j_max: float

    def __post_init__(self):
        for lo, hi, name in (
            (self.v_min, self.v_max, "velocity"),
            (self.a_min, self.a_max, "acceleration"),
            (self.j_min, self.j_max, "jerk"),
        ):
            if not (lo < 0.0 < hi):
                raise ValueError(f"{name} limits must satisfy min < 0 < max, got [{lo}, {hi}]")

    @classmethod
    def symmetric(cls, v_max: float, a_max: float, j_max: float) -> "AxisLimits":
        return cls(-v_max, v_max, -a_max, a_max, -j_max, j_max)

    def scaled_velocity(self, v_max: float) -> "AxisLimits":
        return AxisLimits(-v_max, v_max, self.a_min, self.a_max, self.j_min, self.j_max)

    def mirrored(self) -> "AxisLimits":
        return AxisLimits(-self.v_max, -self.v_min, -self.a_max, -self.a_min, -self.j_max, -self.j_min)


TABLE1_XY = AxisLimits.symmetric(5.0, 4.0, 5.0)
TABLE1_Z = AxisLimits.symmetric(1.0, 10.0, 50.0)


def _advance(p, v, a, j, t):
    # exact integration of constant jerk; works on floats and numpy arrays
    return (
        p + t * (v + t * (a / 2.0 + t * j / 6.0)),
        v + t * (a + t * j / 2.0),
        a + t * j,
    )


@dataclass(frozen=True)
class MotionProfile:
    """Piecewise-constant-jerk trajectory starting at ``initial``.

    ``clamped`` is set when the requested start state was outside the
    admissible set and had to be projected onto it before planning.
    """

    initial: AxisState
    segments: tuple[tuple[float, float], ...] = ()
    clamped: bool = False

    def __post_init__(self):
        for dur, _ in self.segments:
            if dur < 0.0:
                raise ValueError(f"negative segment duration {dur}")

    @cached_property
    def knots(self) -> tuple[tuple[float, float, float, float], ...]:
        """(t, p, v, a) at the start of every segment plus the terminal knot."""
        t = 0.0
        p, v, a = self.initial.as_tuple()
        out = [(t, p, v, a)]
        for dur, jerk in self.segments:
            p, v, a = _advance(p, v, a, jerk, dur)
            t += dur
            out.append((t, p, v, a))
        return tuple(out)

    @property
    def duration(self) -> float:
        return self.knots[-1][0]

    @property
    def terminal(self) -> AxisState:
        _, p, v, a = self.knots[-1]
        return AxisState(p, v, a)

    @property
    def is_empty(self) -> bool:
        return self.duration == 0.0

    def sample(self, t: float) -> AxisState:
        return sample(self, t)

    def jerk_at(self, t: float) -> float:
        if t < 0.0 or t >= self.duration:
            return 0.0
        for (t0, *_), (dur, jerk) in zip(self.knots, self.segments):
            if t < t0 + dur:
                return jerk
        return 0.0

    def shifted(self, dt: float) -> "MotionProfile":
        """The remainder of this profile after ``dt`` seconds."""
        if dt <= 0.0:
            return self
        start = self.sample(dt)
        segs = []
        for (t0, *_), (dur, jerk) in zip(self.knots, self.segments):
            end = t0 + dur
            if end <= dt:
                continue
            segs.append((end - max(t0, dt), jerk))
        return MotionProfile(start, tuple(segs))

    def sample_many(self, ts: Sequence[float] | np.ndarray) -> np.ndarray:
        """Vectorized sampling; returns an array of shape (len(ts), 3)."""
        ts = np.clip(np.asarray(ts, dtype=float), 0.0, None)
        knots = np.array(self.knots)
        jerks = np.array([j for _, j in self.segments] + [0.0])
        idx = np.searchsorted(knots[:, 0], ts, side="right") - 1
        idx = np.clip(idx, 0, len(knots) - 1)
        tau = ts - knots[idx, 0]
        j = jerks[idx]
        # the terminal knot holds acceleration constant; clamp to the terminal state instead
        last = len(knots) - 1
        tau = np.where(idx == last, 0.0, tau)
        p, v, a = _advance(knots[idx, 1], knots[idx, 2], knots[idx, 3], j, tau)
        return np.column_stack([p, v, a])


def sample(profile: MotionProfile, t: float) -> AxisState:
    """State of ``profile`` at time ``t``; times past the end clamp to the terminal state."""
    knots = profile.knots
    if t <= 0.0:
        return profile.initial
    if t >= knots[-1][0]:
        return profile.terminal
    for (t0, p, v, a), (dur, jerk) in zip(knots, profile.segments):
        if t < t0 + dur:
            return AxisState(*_advance(p, v, a, jerk, t - t0))
    return profile.terminal


# ---------------------------------------------------------------------------
# admissibility


def _check_limits(limits: AxisLimits) -> None:
    if not isinstance(limits, AxisLimits):
        raise TypeError("limits must be an AxisLimits")


def _admissible_start(state: AxisState, lim: AxisLimits) -> tuple[AxisState, bool]:
    """Project ``state`` onto the set from which the velocity limits are avoidable."""
    p, v, a = state.as_tuple()
    v0, a0 = v, a
    a = min(max(a, lim.a_min), lim.a_max)
    v = min(max(v, lim.v_min), lim.v_max)
    if a > 0.0:
        # ramping a down to zero at j_min adds a^2 / (2 |j_min|) of velocity
        room = lim.v_max - v
        a = min(a, math.sqrt(2.0 * -lim.j_min * max(room, 0.0)))
    elif a < 0.0:
        room = v - lim.v_min
        a = max(a, -math.sqrt(2.0 * lim.j_max * max(room, 0.0)))
    changed = abs(v - v0) > 1e-12 or abs(a - a0) > 1e-12
    return (AxisState(p, v, a) if changed else state), changed


def _check_goal(goal: AxisState, lim: AxisLimits) -> None:
    _, v, a = goal.as_tuple()
    eps = 1e-9
    if not (lim.v_min - eps <= v <= lim.v_max + eps):
        raise InfeasibleGoal(f"goal velocity {v} outside [{lim.v_min}, {lim.v_max}]")
    if not (lim.a_min - eps <= a <= lim.a_max + eps):
        raise InfeasibleGoal(f"goal acceleration {a} outside [{lim.a_min}, {lim.a_max}]")
    # the velocity just before arrival must have been admissible as well
    if a < 0.0 and v + a * a / (2.0 * -lim.j_min) > lim.v_max + eps:
        raise InfeasibleGoal("goal can only be entered from above the velocity limit")
    if a > 0.0 and v - a * a / (2.0 * lim.j_max) < lim.v_min - eps:
        raise InfeasibleGoal("goal can only be entered from below the velocity limit")


# ---------------------------------------------------------------------------
# second-order building block: (v, a) -> (v1, a1) in minimum time


def _velocity_transfer(v0, a0, v1, a1, A1, A2, J1, J2):
    """Minimum-time jerk sequence moving (v0, a0) to (v1, a1), ignoring position.

    Limits are passed as positive magnitudes: acceleration in [-A2, A1],
    jerk in [-J2, J1].  Returns a list of (duration, jerk) or None.
    """
    dv = v1 - v0
    k1, k2 = 0.5 / J1, 0.5 / J2
    best = None
    # rise to a peak with +J1 then fall with -J2
    sq = (dv + k1 * a0 * a0 + k2 * a1 * a1) / (k1 + k2)
    if sq >= -1e-12:
        ap = math.sqrt(max(sq, 0.0))
        if ap >= max(a0, a1) - 1e-12:
            if ap <= A1:
                segs = [((ap - a0) / J1, J1), ((ap - a1) / J2, -J2)]
            else:
                hold = (dv - k1 * (A1 * A1 - a0 * a0) - k2 * (A1 * A1 - a1 * a1)) / A1
                segs = [((A1 - a0) / J1, J1), (hold, 0.0), ((A1 - a1) / J2, -J2)]
            best = segs
    # fall to a trough with -J2 then rise with +J1
    sq = (k2 * a0 * a0 + k1 * a1 * a1 - dv) / (k1 + k2)
    if sq >= -1e-12:
        at = -math.sqrt(max(sq, 0.0))
        if at <= min(a0, a1) + 1e-12:
            if at >= -A2:
                segs = [((a0 - at) / J2, -J2), ((a1 - at) / J1, J1)]
            else:
                hold = (k2 * (a0 * a0 - A2 * A2) + k1 * (a1 * a1 - A2 * A2) - dv) / A2
                segs = [((a0 + A2) / J2, -J2), (hold, 0.0), ((a1 + A2) / J1, J1)]
            if best is None or sum(d for d, _ in segs) < sum(d for d, _ in best):
                best = segs
    if best is None or any(d < -1e-9 for d, _ in best):
        return None
    return [(max(d, 0.0), j) for d, j in best]


def _integrate(p, v, a, segs):
    for dur, jerk in segs:
        p, v, a = _advance(p, v, a, jerk, dur)
    return p, v, a


# ---------------------------------------------------------------------------
# root finding along one-parameter families


_FIT_CACHE: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _fit_operator(deg: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if deg not in _FIT_CACHE:
        n = deg + 3
        nodes = np.cos(np.pi * (np.arange(n) + 0.5) / n)
        vander = np.polynomial.chebyshev.chebvander(nodes, deg)
        deriv = np.polynomial.chebyshev.chebder(np.eye(deg + 1))
        _FIT_CACHE[deg] = (nodes, np.linalg.pinv(vander), deriv)
    return _FIT_CACHE[deg]


def _cheb_roots(coef: np.ndarray) -> np.ndarray:
    """Complex roots of a Chebyshev series with a nonzero leading coefficient."""
    if len(coef) == 2:
        return np.array([-coef[0] / coef[1]], complex)
    if len(coef) == 3:
        # c0 + c1 x + c2 (2x^2 - 1)
        return np.roots([2.0 * coef[2], coef[1], coef[0] - coef[2]]).astype(complex)
    return np.linalg.eigvals(np.polynomial.chebyshev.chebcompanion(coef))


def _poly_roots(fun: Callable, lo: float, hi: float, deg: int) -> list[float]:
    """Real roots in [lo, hi] of ``fun``, which must be a polynomial of degree <= deg.

    The polynomial is recovered exactly by Chebyshev interpolation and its
    roots are polished with Newton steps on ``fun`` itself.
    """
    if not (hi >= lo) or not math.isfinite(lo) or not math.isfinite(hi):
        return []
    if hi - lo < 1e-12:
        return [lo] if abs(fun(lo)) < 1e-9 else []
    nodes, pinv, deriv = _fit_operator(deg)
    half, mid = 0.5 * (hi - lo), 0.5 * (hi + lo)
    ys = fun(mid + half * nodes)
    if not np.all(np.isfinite(ys)):
        return []
    scale = float(np.max(np.abs(ys)))
    if scale == 0.0:
        return [lo]
    coef = pinv @ (ys / scale)
    # trim numerically zero leading coefficients so chebroots stays well conditioned
    k = len(coef)
    while k > 1 and abs(coef[k - 1]) < 1e-13:
        k -= 1
    if k < 2:
        return []
    dcoef = deriv[: k - 1, :k] @ coef[:k]
    coef = coef[:k]
    out = []
    for r in _cheb_roots(coef):
        # clusters near a multiple root split into complex pairs; Newton and validation sort them out
        if abs(r.imag) > 1e-2:
            continue
        s = r.real
        if s < -1.0 - 1e-6 or s > 1.0 + 1e-6:
            continue
        s = min(max(s, -1.0), 1.0)
        # the interpolant is exact, so its roots need at most a couple of Newton steps
        for _ in range(2):
            f = fun(mid + half * s) / scale
            d = float(np.polynomial.chebyshev.chebval(s, dcoef))
            if f == 0.0 or d == 0.0 or not math.isfinite(f):
                break
            step = f / d
            s = min(max(s - step, -1.0), 1.0)
            if abs(step) < 1e-14:
                break
        out.append(float(mid + half * s))
    return out


# ---------------------------------------------------------------------------
# candidate families in the "positive" direction


@dataclass
class _Problem:
    p0: float
    v0: float
    a0: float
    pf: float
    vf: float
    af: float
    vU: float
    vL: float
    A1: float
    A2: float
    J1: float
    J2: float
    candidates: list = field(default_factory=list)

    @property
    def dv(self):
        return self.vf - self.v0


def _cruise_candidate(pr: _Problem):
    part_a = _velocity_transfer(pr.v0, pr.a0, pr.vU, 0.0, pr.A1, pr.A2, pr.J1, pr.J2)
    part_b = _velocity_transfer(pr.vU, 0.0, pr.vf, pr.af, pr.A1, pr.A2, pr.J1, pr.J2)
    if part_a is None or part_b is None:
        return
    pa, _, _ = _integrate(0.0, pr.v0, pr.a0, part_a)
    pb, _, _ = _integrate(0.0, pr.vU, 0.0, part_b)
    cruise = (pr.pf - pr.p0 - pa - pb) / pr.vU
    if cruise < -ROOT_TOL:
        return
    pr.candidates.append(part_a + [(max(cruise, 0.0), 0.0)] + part_b)


def _uddu_segments(pr: _Problem, t1, t2, t3, t6, t7):
    return [(t1, pr.J1), (t2, 0.0), (t3, -pr.J2), (t6, 0.0), (t7, pr.J1)]


def _uddu_residual(pr: _Problem, t1, t2, t3, t6, t7):
    p, v, a = pr.p0, pr.v0, pr.a0
    p, v, a = _advance(p, v, a, pr.J1, t1)
    p, v, a = _advance(p, v, a, 0.0, t2)
    p, v, a = _advance(p, v, a, -pr.J2, t3)
    p, v, a = _advance(p, v, a, 0.0, t6)
    p, v, a = _advance(p, v, a, pr.J1, t7)
    return p - pr.pf


def _no_cruise_candidates(pr: _Problem):
    """Up/down/up jerk profiles without a cruise phase (four limit sub-cases)."""
    A1, A2, J1, J2 = pr.A1, pr.A2, pr.J1, pr.J2
    a0, af, dv = pr.a0, pr.af, pr.dv
    k1, k2 = 0.5 / J1, 0.5 / J2

    # (a) neither acceleration limit reached: peak u, trough w with u^2 - w^2 = D.
    #     Parametrize the hyperbola by m = u - w = J2 * t3.
    D = (dv - k1 * (af * af - a0 * a0)) / (k1 + k2)

    def fam_a(m):
        u = 0.5 * (m + D / m)
        w = 0.5 * (D / m - m)
        return (u - a0) / J1, 0.0 * m, m / J2, 0.0 * m, (af - w) / J1

    def res_a(m):
        return m**3 * _uddu_residual(pr, *fam_a(m))

    for m in _poly_roots(res_a, 1e-12 * (A1 + A2), A1 + A2, 6):
        pr.candidates.append(_uddu_segments(pr, *fam_a(m)))

    # (b) peak clipped at A1, free trough w
    def fam_b(w):
        t2 = (dv - k1 * (A1 * A1 - a0 * a0) - k2 * (A1 * A1 - w * w) - k1 * (af * af - w * w)) / A1
        return (A1 - a0) / J1 + 0.0 * w, t2, (A1 - w) / J2, 0.0 * w, (af - w) / J1

    for w in _poly_roots(lambda w: _uddu_residual(pr, *fam_b(w)), -A2, min(A1, af), 4):
        pr.candidates.append(_uddu_segments(pr, *fam_b(w)))

    # (c) trough clipped at -A2, free peak u
    def fam_c(u):
        t6 = (k1 * (u * u - a0 * a0) + k2 * (u * u - A2 * A2) + k1 * (af * af - A2 * A2) - dv) / A2
        return (u - a0) / J1, 0.0 * u, (u + A2) / J2, t6, (af + A2) / J1 + 0.0 * u

    for u in _poly_roots(lambda u: _uddu_residual(pr, *fam_c(u)), max(a0, -A2), A1, 4):
        pr.candidates.append(_uddu_segments(pr, *fam_c(u)))

    # (d) both clipped; hold durations t2, t6 tied by the velocity balance
    t1, t3, t7 = (A1 - a0) / J1, (A1 + A2) / J2, (af + A2) / J1
    base = k1 * (A1 * A1 - a0 * a0) + k2 * (A1 * A1 - A2 * A2) + k1 * (af * af - A2 * A2) - dv

    def fam_d(t2):
        z = 0.0 * t2
        return t1 + z, t2, t3 + z, (A1 * t2 + base) / A2, t7 + z

    lo = max(0.0, -base / A1)
    for t2 in _poly_roots(lambda t: _uddu_residual(pr, *fam_d(t)), lo, lo + 10.0 + abs(pr.pf - pr.p0), 2):
        pr.candidates.append(_uddu_segments(pr, *fam_d(t2)))


def _problem(p0, v0, a0, pf, vf, af, lim: AxisLimits, sign: float) -> _Problem:
    if sign > 0:
        return _Problem(p0, v0, a0, pf, vf, af, lim.v_max, lim.v_min, lim.a_max, -lim.a_min, lim.j_max, -lim.j_min)
    return _Problem(-p0, -v0, -a0, -pf, -vf, -af, -lim.v_min, -lim.v_max, -lim.a_min, lim.a_max, -lim.j_min, lim.j_max)


def _clean(segs):
    out = []
    for dur, jerk in segs:
        dur, jerk = float(dur), float(jerk)
        if dur <= 1e-12:
            continue
        if out and out[-1][1] == jerk:
            out[-1] = (out[-1][0] + dur, jerk)
        else:
            out.append((dur, jerk))
    return out


def _valid(start: AxisState, goal: AxisState, segs, lim: AxisLimits, tol: float = STATE_TOL) -> bool:
    p, v, a = start.as_tuple()
    vtol = 1e-9 * max(1.0, lim.v_max - lim.v_min)
    atol = 1e-9 * max(1.0, lim.a_max - lim.a_min)
    for dur, jerk in segs:
        if dur < 0.0 or not math.isfinite(dur):
            return False
        if jerk > lim.j_max * (1 + 1e-12) or jerk < lim.j_min * (1 + 1e-12):
            return False
        if jerk != 0.0:
            tstar = -a / jerk
            if 0.0 < tstar < dur:
                vx = v + tstar * (a + tstar * jerk / 2.0)
                if not (lim.v_min - vtol <= vx <= lim.v_max + vtol):
                    return False
        p, v, a = _advance(p, v, a, jerk, dur)
        if not (lim.v_min - vtol <= v <= lim.v_max + vtol):
            return False
        if not (lim.a_min - atol <= a <= lim.a_max + atol):
            return False
    gp, gv, ga = goal.as_tuple()
    scale = 1.0 + abs(gp) + abs(start.position)
    return abs(p - gp) <= tol * scale and abs(v - gv) <= tol * max(1.0, abs(gv)) and abs(a - ga) <= tol * max(1.0, abs(ga))


def _best(start: AxisState, goal: AxisState, lim: AxisLimits):
    toward = 1.0 if goal.position >= start.position else -1.0
    problems = {sign: _problem(*start.as_tuple(), *goal.as_tuple(), lim, sign) for sign in (toward, -toward)}
    # cruising at the velocity limit toward the goal cannot be beaten when it is feasible
    _cruise_candidate(problems[toward])
    for segs in problems[toward].candidates:
        segs = _clean([(d, toward * j) for d, j in segs])
        if _valid(start, goal, segs, lim):
            return segs
    _cruise_candidate(problems[-toward])
    best, best_key = None, None
    for sign, pr in problems.items():
        _no_cruise_candidates(pr)
        for segs in pr.candidates:
            segs = _clean([(d, sign * j) for d, j in segs])
            if not _valid(start, goal, segs, lim):
                continue
            key = (sum(d for d, _ in segs), len(segs))
            if best_key is None or key[0] < best_key[0] - ROOT_TOL or (
                abs(key[0] - best_key[0]) <= ROOT_TOL and key[1] < best_key[1]
            ):
                best, best_key = segs, key
    return best


def _same_state(x: AxisState, y: AxisState) -> bool:
    return (
        abs(x.position - y.position) <= 1e-12
        and abs(x.velocity - y.velocity) <= 1e-12
        and abs(x.acceleration - y.acceleration) <= 1e-12
    )


def plan_time_optimal(start: AxisState, goal: AxisState, limits: AxisLimits) -> MotionProfile:
    """Fastest jerk-limited profile from ``start`` to ``goal``.

    Start states outside the admissible set are projected onto it first and
    the returned profile carries ``clamped=True``.

    Raises:
        InfeasibleGoal: the goal violates the limits or no profile reaches it.
    """
    _check_limits(limits)
    _check_goal(goal, limits)
    start, clamped = _admissible_start(start, limits)
    if _same_state(start, goal):
        return MotionProfile(start, (), clamped)
    segs = _best(start, goal, limits)
    if segs is None:
        raise InfeasibleGoal(f"no admissible profile from {start} to {goal}")
    return MotionProfile(start, tuple(segs), clamped)


# ---------------------------------------------------------------------------
# fixed arrival time


def _cruise_profile(start: AxisState, goal: AxisState, lim: AxisLimits, speed: float, T: float):
    """Accelerate to ``speed``, cruise, then move to ``goal``; total duration ``T``.

    Returns (position residual, segments) or None if the transfers alone exceed T.
    """
    A1, A2, J1, J2 = lim.a_max, -lim.a_min, lim.j_max, -lim.j_min
    part_a = _velocity_transfer(start.velocity, start.acceleration, speed, 0.0, A1, A2, J1, J2)
    part_b = _velocity_transfer(speed, 0.0, goal.velocity, goal.acceleration, A1, A2, J1, J2)
    if part_a is None or part_b is None:
        return None
    cruise = T - sum(d for d, _ in part_a) - sum(d for d, _ in part_b)
    if cruise < -ROOT_TOL:
        return None
    segs = part_a + [(max(cruise, 0.0), 0.0)] + part_b
    p, _, _ = _integrate(start.position, start.velocity, start.acceleration, segs)
    return p - goal.position, segs


def plan_fixed_time(start: AxisState, goal: AxisState, limits: AxisLimits, T: float,
                    fastest: MotionProfile | None = None) -> MotionProfile:
    """Profile from ``start`` to ``goal`` that arrives after exactly ``T`` seconds.

    The axis is slowed by lowering its cruise speed: the profile accelerates
    to a speed V, cruises and then settles on the goal, with V found by
    bracketing and Brent refinement.  Goals at rest that cannot be reached
    that way are padded with a hold at the goal.

    ``fastest`` may pass in the time-optimal profile for the same problem
    when the caller already has it.

    Raises:
        TimeTooShort: ``T`` is below the time-optimal duration.
    """
    if fastest is None:
        fastest = plan_time_optimal(start, goal, limits)
    t_opt = fastest.duration
    if T < t_opt - 1e-6:
        raise TimeTooShort(f"requested {T:.6f} s but the fastest profile needs {t_opt:.6f} s")
    if T <= t_opt + 1e-9:
        return fastest
    start = fastest.initial
    at_rest = goal.velocity == 0.0 and goal.acceleration == 0.0
    segs = _cruise_retime(start, goal, limits, T)
    if segs is not None:
        return MotionProfile(start, tuple(segs), fastest.clamped)
    if at_rest:
        segs = list(fastest.segments) + [(T - t_opt, 0.0)]
        return MotionProfile(start, tuple(segs), fastest.clamped)
    for which in ("jerk", "acceleration"):
        prof = _retime_by_scaling(start, goal, limits, T, which)
        if prof is not None:
            return MotionProfile(start, prof.segments, fastest.clamped)
    raise TimeTooShort(f"no profile reaches the moving goal in exactly {T:.6f} s")


def _cruise_retime(start: AxisState, goal: AxisState, limits: AxisLimits, T: float):
    """Segments of an accelerate-cruise-settle profile lasting ``T``, or None.

    ``start`` must already be admissible.
    """

    def resid(v):
        out = _cruise_profile(start, goal, limits, v, T)
        return math.nan if out is None else out[0]

    # prefer the cruise speed closest to how the fastest profile moves
    direction = math.copysign(1.0, goal.position - start.position) if goal.position != start.position else 1.0
    # a coarse scan finds the usual single root; the fine one catches close root pairs
    for n in (11, 41):
        grid = np.linspace(limits.v_min, limits.v_max, n)
        for v in sorted(_sign_changes(resid, grid), key=lambda v: -direction * v):
            out = _cruise_profile(start, goal, limits, v, T)
            if out is None:
                continue
            segs = _clean(out[1])
            if _valid(start, goal, segs, limits, tol=1e-6):
                return segs
    return None


def retime_if_cruising(start: AxisState, goal: AxisState, limits: AxisLimits, T: float) -> MotionProfile | None:
    """Cheap attempt at a fixed-time profile that skips the time-optimal solve.

    Returns None when no accelerate-cruise-settle profile of duration ``T``
    exists; callers then fall back to :func:`plan_fixed_time`.  A returned
    profile proves ``T`` is feasible.
    """
    _check_limits(limits)
    _check_goal(goal, limits)
    start, clamped = _admissible_start(start, limits)
    if T <= 0.0:
        return None
    segs = _cruise_retime(start, goal, limits, T)
    return None if segs is None else MotionProfile(start, tuple(segs), clamped)


def _sign_changes(fun: Callable[[float], float], grid: np.ndarray) -> list[float]:
    """Brent-refined roots of ``fun`` in every grid cell where it changes sign (NaN cells skipped)."""
    vals = [fun(v) for v in grid]
    roots = []
    for i in range(len(grid) - 1):
        f0, f1 = vals[i], vals[i + 1]
        if math.isnan(f0) or math.isnan(f1):
            continue
        if f0 == 0.0:
            roots.append(float(grid[i]))
        elif f0 * f1 < 0.0:
            try:
                roots.append(brentq(fun, grid[i], grid[i + 1], xtol=1e-13, rtol=4 * np.finfo(float).eps))
            except ValueError:
                # infeasible speeds inside the cell; a finer grid may still isolate the root
                continue
    if vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots


def _scaled_limits(lim: AxisLimits, which: str, lam: float) -> AxisLimits:
    if which == "jerk":
        return AxisLimits(lim.v_min, lim.v_max, lim.a_min, lim.a_max, lim.j_min * lam, lim.j_max * lam)
    return AxisLimits(lim.v_min, lim.v_max, lim.a_min * lam, lim.a_max * lam, lim.j_min, lim.j_max)


def _retime_by_scaling(start, goal, lim, T, which, max_iter=100):
    """Bisection on a common scale of the jerk (or acceleration) limits until the optimum lasts T."""

    def plan(lam):
        scaled = _scaled_limits(lim, which, lam)
        if _admissible_start(start, scaled)[1]:
            return None
        try:
            return plan_time_optimal(start, goal, scaled)
        except PlanningError:
            return None

    hi_lam, lo_lam = 1.0, None
    for lam in np.geomspace(1.0, 0.02, 25)[1:]:
        prof = plan(lam)
        if prof is None:
            return None
        if prof.duration >= T:
            lo_lam = lam
            break
        hi_lam = lam
    if lo_lam is None:
        return None
    for _ in range(max_iter):
        mid = 0.5 * (lo_lam + hi_lam)
        prof = plan(mid)
        if prof is None:
            return None
        if abs(prof.duration - T) <= 1e-7:
            return prof
        if prof.duration > T:
            lo_lam = mid
        else:
            hi_lam = mid
    return None
