"""Ground-truth reference computations at desk scale.

Everything here is written independently of the solver's incremental
machinery: brute-force enumeration, full re-evaluation, Floyd-Warshall,
and dense grid scans.  Test suites cross-check the fast implementations
against these.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .evaluation import (
    Solution,
    evaluate_solution,
    get_context,
    is_feasible,
)
from .instance import Instance, InstanceError, ShortestPathMatrix
from .localsearch import apply_move, enumerate_moves


@dataclass
class OracleBudget:
    max_tasks: int = 7
    grid_steps: int = 10 ** 5


class OracleRefusal(RuntimeError):
    """Instance too large for exhaustive enumeration."""


# ---------------------------------------------------------------------------
# Shortest paths
# ---------------------------------------------------------------------------

def floyd_warshall(inst: Instance) -> ShortestPathMatrix:
    n = inst.n_vertices
    INF = math.inf

    def run(weight):
        dist = [[INF] * n for _ in range(n)]
        pred = [[-1] * n for _ in range(n)]
        for v in range(n):
            dist[v][v] = 0.0
        for a in inst.arcs:
            w = weight(a)
            if w < dist[a.tail][a.head]:
                dist[a.tail][a.head] = w
                pred[a.tail][a.head] = a.tail
        for k in range(n):
            dk = dist[k]
            for i in range(n):
                dik = dist[i][k]
                if dik == INF:
                    continue
                di = dist[i]
                pi = pred[i]
                for j in range(n):
                    nd = dik + dk[j]
                    if nd < di[j]:
                        di[j] = nd
                        pi[j] = pred[k][j]
        return dist, pred

    cost, pred = run(lambda a: a.travel_cost)
    time, _ = run(lambda a: a.travel_time)
    return ShortestPathMatrix(
        tuple(tuple(r) for r in cost),
        tuple(tuple(r) for r in time),
        tuple(tuple(r) for r in pred),
    )


# ---------------------------------------------------------------------------
# Exact solver
# ---------------------------------------------------------------------------

def _best_route_cost_over_t(ctx, codes):
    """(min cost, argmin t) of one encoded route over departure times.

    With static service durations every begin time is t plus a constant
    offset, so the route cost is piecewise linear in t; the minimum lies
    at t=0, at the latest feasible t, or where some task's begin time
    meets an end point of its flat interval.
    """
    _, _, _, begins0, _, end0 = ctx.sim(codes, 0.0)
    hi = ctx.horizon - end0
    if hi < 0:
        return math.inf, 0.0
    cand = {0.0, hi}
    for c, b0 in zip(codes, begins0):
        ti = c >> 1
        for knot in (ctx.bt[ti] - b0, ctx.et[ti] - b0):
            if 0.0 < knot < hi:
                cand.add(knot)
    best_c, best_t = math.inf, 0.0
    for t in sorted(cand):
        sc, dc, *_ = ctx.sim(codes, t)
        c = sc + dc
        if c < best_c:
            best_c, best_t = c, t
    return best_c, best_t


def exact_solve(inst: Instance, sp=None, budget: OracleBudget = OracleBudget()):
    """Global optimum by brute force.

    Returns (tc, Solution with optimized departure times, grid_error_bound).
    Enumerates every partition of the task set into routes, every route
    ordering and orientation, and optimizes each route's departure time.
    """
    n = len(inst.tasks)
    if n > budget.max_tasks:
        raise OracleRefusal(
            f"{n} tasks exceed the enumeration budget of {budget.max_tasks}")
    if sp is None:
        sp = floyd_warshall(inst)
    ctx = get_context(inst, sp)
    full = (1 << n) - 1

    # best single-route plan for every task subset
    best_route = {}
    for mask in range(1, full + 1):
        members = [i for i in range(n) if mask >> i & 1]
        if sum(ctx.demand[i] for i in members) > ctx.capacity:
            continue
        best = (math.inf, None, 0.0)
        for perm in itertools.permutations(members):
            pools = [(2 * i, 2 * i + 1) if ctx.flip_ok[i] else (2 * i,)
                     for i in perm]
            for codes in itertools.product(*pools):
                c, t = _best_route_cost_over_t(ctx, list(codes))
                if c < best[0]:
                    best = (c, codes, t)
        if best[1] is not None:
            best_route[mask] = best

    dp = [math.inf] * (full + 1)
    choice = [0] * (full + 1)
    dp[0] = 0.0
    for mask in range(1, full + 1):
        sub = mask
        while sub:
            if sub in best_route:
                c = dp[mask ^ sub] + best_route[sub][0]
                if c < dp[mask]:
                    dp[mask] = c
                    choice[mask] = sub
            sub = (sub - 1) & mask
    if dp[full] == math.inf:
        raise InstanceError("no feasible plan exists")

    routes = []
    t0s = []
    mask = full
    while mask:
        sub = choice[mask]
        _, codes, t = best_route[sub]
        routes.append(list(codes))
        t0s.append(t)
        mask ^= sub
    sol = ctx.decode_routes(routes, t0s)
    # documented resolution bound of an equivalent dense grid scan; the
    # enumeration above is exact on piecewise-linear landscapes
    err = (inst.planning_horizon * inst.global_slope_abs * max(n, 1)
           / budget.grid_steps)
    return dp[full], sol, err


# ---------------------------------------------------------------------------
# Exhaustive neighborhood
# ---------------------------------------------------------------------------

def exhaustive_neighborhood(inst, sp, sol: Solution, kind: str):
    """(best feasible neighbor, {move: record}) by full re-evaluation."""
    base = evaluate_solution(inst, sp, sol).tc
    best = None
    best_tc = base
    record = {}
    for move in enumerate_moves(inst, sp, kind, sol):
        neighbor = apply_move(inst, sp, sol, move)
        feasible, _ = is_feasible(inst, sp, neighbor)
        tc = evaluate_solution(inst, sp, neighbor).tc
        delta = tc - base
        record[move] = {
            "classified": "successful" if feasible and delta < 0 else "failed",
            "delta": delta,
            "feasible": feasible,
        }
        if feasible and tc < best_tc:
            best_tc = tc
            best = neighbor
    return (best if best is not None else sol), record


# ---------------------------------------------------------------------------
# Classic CARP reference evaluator
# ---------------------------------------------------------------------------

def classic_evaluate(base, routes):
    """Total cost of a classic CARP plan on a ClassicInstance.

    routes: lists of (edge index into base.edges, flipped).  Uses its own
    Floyd-Warshall over the undirected edge costs; service cost of an
    edge equals its traversal cost.
    """
    INF = math.inf
    idx = {v: i for i, v in enumerate(
        sorted({base.depot} | {e.u for e in base.edges}
               | {e.v for e in base.edges}))}
    m = len(idx)
    dist = [[INF] * m for _ in range(m)]
    for i in range(m):
        dist[i][i] = 0.0
    for e in base.edges:
        u, v = idx[e.u], idx[e.v]
        if e.cost < dist[u][v]:
            dist[u][v] = dist[v][u] = e.cost
    for k in range(m):
        for i in range(m):
            for j in range(m):
                nd = dist[i][k] + dist[k][j]
                if nd < dist[i][j]:
                    dist[i][j] = nd
    total = 0.0
    depot = idx[base.depot]
    for route in routes:
        cur = depot
        for ei, flipped in route:
            e = base.edges[ei]
            u, v = (idx[e.v], idx[e.u]) if flipped else (idx[e.u], idx[e.v])
            total += dist[cur][u] + e.cost
            cur = v
        total += dist[cur][depot]
    return total


# ---------------------------------------------------------------------------
# Dense grid scan
# ---------------------------------------------------------------------------

def grid_scan(f, lo: float, hi: float, steps: int):
    """(argmin, min) of f over an inclusive uniform grid."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if hi <= lo:
        return lo, f(lo)
    best_t, best_c = lo, f(lo)
    for k in range(1, steps + 1):
        t = lo + (hi - lo) * k / steps
        c = f(t)
        if c < best_c:
            best_t, best_c = t, c
    return best_t, best_c
