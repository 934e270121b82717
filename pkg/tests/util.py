"""Shared helpers for tests: random feasible plans and move sampling."""

import random

from carptdsc import Route, Solution, enumerate_moves
from carptdsc.evaluation import get_context


def random_feasible_solution(inst, sp, rng: random.Random) -> Solution:
    """Random-order greedy packing; always capacity- and horizon-feasible."""
    ctx = get_context(inst, sp)
    order = list(range(ctx.n_tasks))
    rng.shuffle(order)
    routes = [[]]
    for ti in order:
        oc = 2 * ti + (1 if ctx.flip_ok[ti] and rng.random() < 0.5 else 0)
        placed = False
        for codes in rng.sample(routes, len(routes)):
            load = sum(ctx.demand[c >> 1] for c in codes)
            if load + ctx.demand[ti] > ctx.capacity:
                continue
            cand = codes + [oc]
            _, _, _, _, _, end = ctx.sim(cand, 0.0)
            if end <= ctx.horizon:
                codes.append(oc)
                placed = True
                break
        if not placed:
            routes.append([oc])
    routes = [r for r in routes if r]
    return ctx.decode_routes(routes, [0.0] * len(routes))


def sample_moves(inst, sp, sol, rng: random.Random, k: int, kinds=None):
    """Up to k moves drawn uniformly from the full neighborhood."""
    from carptdsc import DOUBLE_INSERTION, SINGLE_INSERTION, SWAP

    kinds = kinds or (SINGLE_INSERTION, DOUBLE_INSERTION, SWAP)
    moves = [m for kind in kinds for m in enumerate_moves(inst, sp, kind, sol)]
    if len(moves) <= k:
        return moves
    return rng.sample(moves, k)
