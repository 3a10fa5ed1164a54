"""Brute-force reference solutions used only by the test-suite.

Nothing here imports the planner; these are independent routes to the same
numbers.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import linprog


def _transition(dt: float):
    A = np.array([[1.0, dt, dt * dt / 2], [0.0, 1.0, dt], [0.0, 0.0, 1.0]])
    B = np.array([dt**3 / 6, dt * dt / 2, dt])
    return A, B


def _reachable(start, goal, lim, T: float, n: int) -> bool:
    """Is there a jerk sequence on an n-step grid over [0, T] reaching goal?

    Forward simulation of the triple integrator is linear in the jerk
    samples, so feasibility is an LP.  Velocity and acceleration limits are
    enforced at every grid knot.
    """
    if T <= 0.0:
        return np.allclose(start, goal, atol=1e-9)
    dt = T / n
    A, B = _transition(dt)
    # state_k = A^k x0 + sum_i A^(k-1-i) B j_i
    powers = [np.eye(3)]
    for _ in range(n):
        powers.append(A @ powers[-1])
    x0 = np.asarray(start, float)
    # M[k, :, i] = A^(k-1-i) B for i < k, zero otherwise
    PB = np.array([P @ B for P in powers[:n]])
    k, i = np.meshgrid(np.arange(n + 1), np.arange(n), indexing="ij")
    lag = k - 1 - i
    M = np.where((lag >= 0)[:, None, :], PB[np.clip(lag, 0, n - 1)].transpose(0, 2, 1), 0.0)
    free = np.array([powers[k] @ x0 for k in range(n + 1)])
    vmin, vmax, amin, amax, jmin, jmax = lim
    A_ub = np.vstack([M[1:, 1, :], -M[1:, 1, :], M[1:, 2, :], -M[1:, 2, :]])
    b_ub = np.concatenate([
        vmax - free[1:, 1], free[1:, 1] - vmin, amax - free[1:, 2], free[1:, 2] - amin,
    ]) + 1e-9
    A_eq = M[n]
    b_eq = np.asarray(goal, float) - free[n]
    res = linprog(np.zeros(n), A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=[(jmin, jmax)] * n, method="highs")
    return res.status == 0


def min_time_bruteforce(start, goal, lim, n: int = 160, t_max: float = 60.0, tol: float = 1e-3) -> float:
    """Minimum arrival time over discretized jerk sequences.

    ``start``/``goal`` are (p, v, a) triples and ``lim`` is
    (v_min, v_max, a_min, a_max, j_min, j_max).  A coarse upward scan finds
    the first feasible duration, then bisection narrows it to ``tol``.
    """
    step = 0.25
    lo, hi = 0.0, None
    t = step
    while t <= t_max:
        if _reachable(start, goal, lim, t, n):
            hi = t
            break
        lo = t
        t += step
    if hi is None:
        return math.inf
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _reachable(start, goal, lim, mid, n):
            hi = mid
        else:
            lo = mid
    return hi


def bang_bang_rest_to_rest(distance: float, v_max: float, a_max: float, j_max: float, grid: int = 400) -> float:
    """Exhaustive search over symmetric 7-phase switching times for a rest-to-rest move.

    The jerk phase t_j and the constant-acceleration phase t_a are swept on a
    grid; for each pair the cruise phase is whatever covers the remaining
    distance.  Returns the smallest feasible total duration.
    """
    best = math.inf
    for tj in np.linspace(1e-6, a_max / j_max, grid):
        peak_a = j_max * tj
        for ta in np.linspace(0.0, 2 * v_max / max(peak_a, 1e-9), grid):
            v_peak = peak_a * (tj + ta)
            if v_peak > v_max + 1e-12:
                break
            # distance covered while accelerating from rest to v_peak
            d_acc = v_peak * (2 * tj + ta) / 2
            rest = distance - 2 * d_acc
            if rest < 0:
                break
            best = min(best, 2 * (2 * tj + ta) + rest / v_peak)
    return best


def simulate_jerk(start, segments, dt: float = 1e-4):
    """Euler-free forward simulation of (duration, jerk) segments on a fine grid."""
    p, v, a = start
    for dur, j in segments:
        n = max(1, int(round(dur / dt)))
        h = dur / n
        for _ in range(n):
            p += v * h + a * h * h / 2 + j * h**3 / 6
            v += a * h + j * h * h / 2
            a += j * h
    return p, v, a
