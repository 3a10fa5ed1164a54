"""Report figures for simulated runs and seed sweeps.

Figures are built on :class:`matplotlib.figure.Figure` directly, so no
pyplot state or interactive backend is involved.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib
import numpy as np
from matplotlib.figure import Figure
from matplotlib.patches import Rectangle

from .sim.run import Metrics, Trace
from .sim.scenario import Scenario

STYLE = {
    "font.size": 9,
    "axes.titlesize": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.2,
    "axes.grid": True,
    "grid.alpha": 0.3,
}

# one color per FSM state, stable across figures
_STATE_COLORS = {
    "Takeoff": "tab:gray",
    "Search": "tab:blue",
    "Pop": "tab:red",
    "ReturnToCenter": "tab:green",
    "Land": "tab:brown",
    "WaitAtCorner": "tab:blue",
    "Chase": "tab:red",
    "Brake": "tab:orange",
}


def _rect(ax, r, **kw):
    ax.add_patch(Rectangle((r.x_min, r.y_min), r.x_max - r.x_min, r.y_max - r.y_min, **kw))


def _state_runs(states: Sequence[str]):
    """(state, first index, last index + 1) for every run of identical states."""
    runs, start = [], 0
    for i in range(1, len(states) + 1):
        if i == len(states) or states[i] != states[start]:
            runs.append((states[start], start, i))
            start = i
    return runs


def flight_figure(trace: Trace, scenario: Scenario, metrics: Metrics | None = None) -> Figure:
    """Top view of the flight colored by mission state, plus altitude and speed over time."""
    with matplotlib.rc_context(STYLE):
        return _flight_figure(trace, scenario, metrics)


def _flight_figure(trace, scenario, metrics):
    fig = Figure(figsize=(10.0, 6.2), layout="constrained")
    gs = fig.add_gridspec(2, 2, height_ratios=[1.6, 1.0])
    top = fig.add_subplot(gs[0, :])
    alt = fig.add_subplot(gs[1, 0])
    spd = fig.add_subplot(gs[1, 1], sharex=alt)

    t = trace.array("t")
    x, y, z = trace.array("x"), trace.array("y"), trace.array("z")
    speed = np.hypot(trace.array("vx"), trace.array("vy"))
    states = [r[11] for r in trace.rows]

    _rect(top, scenario.arena, fill=False, ec="black", lw=1.0)
    fence = scenario.fence
    _rect(top, fence.area, fill=False, ec="tab:gray", ls="--", lw=0.8)
    for k in fence.keepouts:
        _rect(top, k, fc="0.85", ec="0.5", hatch="//", lw=0.6)
    seen = set()
    for state, i0, i1 in _state_runs(states):
        label = None if state in seen else state
        seen.add(state)
        j1 = min(i1 + 1, len(t))
        top.plot(x[i0:j1], y[i0:j1], color=_STATE_COLORS.get(state, "black"), label=label)
    if len(scenario.balloons):
        b = np.asarray(scenario.balloons)
        popped = np.asarray(metrics.popped, bool) if metrics is not None and metrics.popped else np.zeros(len(b), bool)
        top.scatter(b[~popped, 0], b[~popped, 1], s=40, marker="o", fc="none", ec="tab:purple", label="balloon")
        top.scatter(b[popped, 0], b[popped, 1], s=40, marker="x", color="tab:purple", label="popped")
    if scenario.target is not None:
        course = scenario.target.course
        ts = np.linspace(0.0, course.lap_length / course.speed, 400)
        path = np.array([course.position(s) for s in ts])
        top.plot(path[:, 0], path[:, 1], color="goldenrod", lw=0.8, ls=":", label="target course")
    top.set_aspect("equal")
    top.set_xlabel("x [m]")
    top.set_ylabel("y [m]")
    top.set_title(f"{scenario.name}: flight path (seed {scenario.seed}, {scenario.mission.strategy})"
                  if scenario.kind == "hunt" else f"{scenario.name}: flight path (seed {scenario.seed})")
    top.legend(loc="upper left", bbox_to_anchor=(1.01, 1.0), frameon=False)

    alt.plot(t, z, color="black")
    alt.axhspan(fence.z_min, fence.z_max, color="tab:green", alpha=0.12, lw=0)
    alt.set_xlabel("t [s]")
    alt.set_ylabel("z [m]")
    alt.set_title("altitude and allowed corridor")

    spd.plot(t, speed, color="black")
    for state, i0, i1 in _state_runs(states):
        spd.axvspan(t[i0], t[min(i1, len(t) - 1)], color=_STATE_COLORS.get(state, "white"), alpha=0.08, lw=0)
    spd.set_xlabel("t [s]")
    spd.set_ylabel("ground speed [m/s]")
    spd.set_title("ground speed by mission state")
    return fig


def sweep_figure(rows: Sequence[dict]) -> Figure:
    """Tries per balloon and mission time per seed, one series per strategy."""
    with matplotlib.rc_context(STYLE):
        return _sweep_figure(rows)


def _sweep_figure(rows):
    fig = Figure(figsize=(9.0, 3.6), layout="constrained")
    ax_tries, ax_time = fig.subplots(1, 2)
    strategies = sorted({r["strategy"] for r in rows})
    for k, strat in enumerate(strategies):
        sel = [r for r in rows if r["strategy"] == strat]
        seeds = [r["seed"] for r in sel]
        offset = (k - (len(strategies) - 1) / 2) * 0.35
        ax_tries.bar(np.asarray(seeds) + offset, [r["tries_per_balloon"] for r in sel], width=0.35, label=strat)
        ax_time.plot(seeds, [r["total_s"] for r in sel], marker="o", ms=3, label=strat)
    ax_tries.set_xlabel("seed")
    ax_tries.set_ylabel("tries per balloon")
    ax_tries.set_title("tries per balloon")
    ax_time.set_xlabel("seed")
    ax_time.set_ylabel("mission time [s]")
    ax_time.set_title("mission time")
    for ax in (ax_tries, ax_time):
        ax.legend(frameon=False)
    return fig


def save(fig: Figure, path: str | Path, dpi: int = 150) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=dpi)
    return path
