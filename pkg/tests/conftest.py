"""Shared helpers and session-cached simulation runs."""

from __future__ import annotations

import numpy as np
import pytest

from uavhunt.sim import load_scenario, run, sweep
from uavhunt.sim.run import _HuntSim
from uavhunt.traj1d import AxisLimits, AxisState, InfeasibleGoal
from uavhunt.traj1d import _admissible_start, _check_goal


def limit_tuple(lim: AxisLimits) -> tuple[float, ...]:
    return (lim.v_min, lim.v_max, lim.a_min, lim.a_max, lim.j_min, lim.j_max)


def random_start(rng: np.random.Generator, lim: AxisLimits, span: float) -> AxisState:
    """Uniform (p, v, a) that is already admissible, so the planner never projects it."""
    while True:
        s = AxisState(rng.uniform(-span, span), rng.uniform(lim.v_min, lim.v_max), rng.uniform(lim.a_min, lim.a_max))
        if not _admissible_start(s, lim)[1]:
            return s


def random_goal(rng: np.random.Generator, lim: AxisLimits, span: float) -> AxisState:
    while True:
        g = random_start(rng, lim, span)
        try:
            _check_goal(g, lim)
        except InfeasibleGoal:
            continue
        return g


def max_violation(profile, lim: AxisLimits, step: float = 1e-3) -> float:
    """Largest relative excess of |v|, |a| or |j| over the limits on a ``step`` grid."""
    ts = np.arange(0.0, profile.duration + step, step)
    pva = profile.sample_many(ts)
    starts = np.array([k[0] for k in profile.knots])
    jerks = np.array([j for _, j in profile.segments] + [0.0])
    js = jerks[np.clip(np.searchsorted(starts, ts, side="right") - 1, 0, len(jerks) - 1)]
    worst = 0.0
    for col, lo, hi in ((pva[:, 1], lim.v_min, lim.v_max), (pva[:, 2], lim.a_min, lim.a_max), (js, lim.j_min, lim.j_max)):
        worst = max(worst, float(np.max(col - hi)) / abs(hi), float(np.max(lo - col)) / abs(lo))
    return worst


@pytest.fixture(scope="session")
def grand_challenge_run():
    """(scenario, trace, metrics, sim); the sim keeps the mission context for route checks."""
    sc = load_scenario("grand_challenge")
    sim = _HuntSim(sc)
    trace, metrics = sim.run()
    return sc, trace, metrics, sim


@pytest.fixture(scope="session")
def strategy_sweep():
    """Six seeds of the non-convex arena under both strategies."""
    sc = load_scenario("l_shaped")
    rows = sweep(sc, range(6), ("star", "direct"))
    return {s: [r for r in rows if r["strategy"] == s] for s in ("star", "direct")}


@pytest.fixture(scope="session")
def chase_run():
    sc = load_scenario("chase").with_(duration=25.0)
    trace, metrics = run(sc)
    return sc, trace, metrics


# acceptance verdicts, printed once at the end of the session
ACCEPTANCE: list[str] = []


def record(criterion: str, title: str, passed: bool, detail: str) -> bool:
    line = f"{criterion:<4} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[0][1:])):
            terminalreporter.write_line(line)
