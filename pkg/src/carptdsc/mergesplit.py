"""Merge-Split large-step operator.

Pools the tasks of a few randomly chosen routes, reorders the pool by
path scanning under the five classic tie-breaking rules (evaluated on
travel cost only), then re-partitions the resulting giant tour optimally
with a shortest-path split dynamic program evaluated at departure time 0.
The best of the five re-plans replaces the chosen routes, guarded so the
result is never worse than the input.
"""

from __future__ import annotations

import random
from typing import Optional

from .evaluation import STATIC, Solution, get_context

# tie-breaking rules for path scanning
_RULES = (1, 2, 3, 4, 5)


def _path_scan_order(ctx, pool, rule, rng):
    """Order the pooled tasks greedily from the depot under one rule.

    pool holds dense task indices; returns a list of oriented codes.
    Capacity resets whenever no unserved task fits the residual load.
    """
    spc = ctx.spc
    otail, ohead = ctx.otail, ctx.ohead
    dem, minsc = ctx.demand, ctx.minsc
    Q, depot = ctx.capacity, ctx.depot
    unserved = set(pool)
    order = []
    cur = depot
    cap_left = Q
    while unserved:
        cands = []
        best_d = None
        for ti in unserved:
            if dem[ti] > cap_left:
                continue
            for oc in ((2 * ti, 2 * ti + 1) if ctx.flip_ok[ti] else (2 * ti,)):
                d = spc[cur][otail[oc]]
                if best_d is None or d < best_d:
                    best_d = d
                    cands = [oc]
                elif d == best_d:
                    cands.append(oc)
        if not cands:
            # close the tour fragment and restart from the depot
            cur = depot
            cap_left = Q
            continue
        if len(cands) == 1:
            pick = cands[0]
        else:
            pick = _break_tie(ctx, cands, rule, cap_left)
        order.append(pick)
        unserved.discard(pick >> 1)
        cap_left -= dem[pick >> 1]
        cur = ohead[pick]
    return order


def _break_tie(ctx, cands, rule, cap_left):
    spc, ohead = ctx.spc, ctx.ohead
    dem, minsc = ctx.demand, ctx.minsc
    depot = ctx.depot
    if rule == 5:
        rule = 1 if cap_left > ctx.capacity / 2 else 2
    if rule == 1:
        key = lambda oc: -spc[ohead[oc]][depot]
    elif rule == 2:
        key = lambda oc: spc[ohead[oc]][depot]
    elif rule == 3:
        key = lambda oc: -(dem[oc >> 1] / minsc[oc >> 1]
                           if minsc[oc >> 1] > 0 else dem[oc >> 1])
    else:
        key = lambda oc: (dem[oc >> 1] / minsc[oc >> 1]
                          if minsc[oc >> 1] > 0 else dem[oc >> 1])
    return min(cands, key=key)


def split_giant_tour(ctx, order):
    """Optimal partition of an ordered oriented-task list into routes.

    Shortest-path dynamic program over break points; each segment is
    simulated at departure time 0 and must satisfy capacity and horizon.
    Returns (routes as lists of codes, total cost) or (None, inf) when no
    feasible partition exists.
    """
    m = len(order)
    INF = float("inf")
    best = [INF] * (m + 1)
    best[0] = 0.0
    back = [-1] * (m + 1)
    for i in range(m):
        if best[i] == INF:
            continue
        load = 0.0
        for j in range(i + 1, m + 1):
            load += ctx.demand[order[j - 1] >> 1]
            if load > ctx.capacity:
                break
            sc, dc, _, _, _, end = ctx.sim(order[i:j], 0.0)
            if end > ctx.horizon + 1e-12:
                break
            c = best[i] + sc + dc
            if c < best[j]:
                best[j] = c
                back[j] = i
    if best[m] == INF:
        return None, INF
    cuts = []
    j = m
    while j > 0:
        i = back[j]
        cuts.append((i, j))
        j = i
    cuts.reverse()
    return [order[i:j] for i, j in cuts], best[m]


def merge_split(inst, sp, sol: Solution, p: int = 2,
                rng: Optional[random.Random] = None,
                duration_mode: str = STATIC) -> Solution:
    """Re-plan the tasks of ``p`` random routes; keep the better plan."""
    if rng is None:
        rng = random.Random()
    if p > len(sol.routes) or p < 1:
        return sol
    ctx = get_context(inst, sp, duration_mode)
    routes = [ctx.encode_route(r) for r in sol.routes]
    t0s = [r.departure_time for r in sol.routes]
    chosen = sorted(rng.sample(range(len(routes)), p))
    chosen_set = set(chosen)
    pool = [c >> 1 for ri in chosen for c in routes[ri]]
    if not pool:
        return sol
    old_cost = 0.0
    for ri in chosen:
        sc, dc, *_ = ctx.sim(routes[ri], t0s[ri])
        old_cost += sc + dc
    best_routes = None
    best_cost = old_cost
    for rule in _RULES:
        order = _path_scan_order(ctx, pool, rule, rng)
        segs, cost = split_giant_tour(ctx, order)
        if segs is not None and cost < best_cost:
            best_cost = cost
            best_routes = segs
    if best_routes is None:
        return sol
    new_routes = [routes[ri] for ri in range(len(routes))
                  if ri not in chosen_set] + best_routes
    new_t0s = [t0s[ri] for ri in range(len(routes))
               if ri not in chosen_set] + [0.0] * len(best_routes)
    return ctx.decode_routes(new_routes, new_t0s)
