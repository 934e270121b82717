"""Benchmark metrics: degradation rate, rank-sum comparison, win-draw-loss."""

from __future__ import annotations

import statistics

from scipy.stats import mannwhitneyu

BETTER = "better"
EQUIVALENT = "equivalent"
WORSE = "worse"


def pdr(c1: float, c2: float) -> float:
    """Performance degradation rate of c1 against reference c2, percent."""
    if c2 <= 0:
        raise ValueError("reference cost must be positive")
    return (c1 - c2) / c2 * 100.0


def u_statistic(a, b) -> float:
    """Mann-Whitney U of sample a: pairs where a exceeds b, ties half."""
    return float(sum((x > y) + 0.5 * (x == y) for x in a for y in b))


def rank_sum_test(a, b, alpha: float = 0.05) -> str:
    """Two-sided Wilcoxon rank-sum verdict for cost samples (lower wins).

    Returns "better" when a is significantly lower than b, "worse" for
    the opposite, "equivalent" otherwise.
    """
    a, b = list(a), list(b)
    if len(a) < 2 or len(b) < 2:
        raise ValueError("need at least 2 samples per side")
    if len(set(a) | set(b)) == 1:
        return EQUIVALENT
    res = mannwhitneyu(a, b, alternative="two-sided", method="asymptotic")
    if res.pvalue >= alpha:
        return EQUIVALENT
    ma, mb = statistics.median(a), statistics.median(b)
    if ma < mb:
        return BETTER
    if ma > mb:
        return WORSE
    return EQUIVALENT


def wdl(pairs, alpha: float = 0.05):
    """(wins, draws, losses) of the first sample over instance pairs.

    pairs: iterable of (samples_a, samples_b), one entry per instance.
    """
    w = d = l = 0
    for a, b in pairs:
        verdict = rank_sum_test(a, b, alpha)
        if verdict == BETTER:
            w += 1
        elif verdict == WORSE:
            l += 1
        else:
            d += 1
    return w, d, l
