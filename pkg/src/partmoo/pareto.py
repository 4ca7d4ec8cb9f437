"""Pareto dominance, dominance numbers and front extraction (maximization)."""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .core import Archive

MAXIMA_SET = "maxima_set"
BRUTE_FORCE = "brute_force"


def dominates(a, b) -> bool:
    """True iff ``a`` is at least as large as ``b`` everywhere and larger somewhere."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return bool(np.all(a >= b) and np.any(a > b))


def _counts_brute_force(Y: np.ndarray) -> np.ndarray:
    n, m = Y.shape
    counts = np.zeros(n, dtype=np.int64)
    # chunked so the (chunk, n) comparison masks stay small
    step = max(1, 4_000_000 // n)
    for start in range(0, n, step):
        block = Y[start:start + step]
        ge = np.ones((len(block), n), dtype=bool)
        gt = np.zeros((len(block), n), dtype=bool)
        for j in range(m):
            col, own = Y[:, j][None, :], block[:, j][:, None]
            ge &= col >= own
            gt |= col > own
        counts[start:start + step] = np.count_nonzero(ge & gt, axis=1)
    return counts


@numba.njit(cache=True)
def _pairwise_sorted(Y, order, sums):
    # rows sorted by descending coordinate sum; a dominator's sum is never smaller
    n, m = Y.shape
    counts = np.zeros(n, dtype=np.int64)
    for a in range(n):
        i = order[a]
        for b in range(n):
            k = order[b]
            if sums[k] < sums[i]:
                break
            if k == i:
                continue
            ge = True
            gt = False
            for j in range(m):
                if Y[k, j] < Y[i, j]:
                    ge = False
                    break
                if Y[k, j] > Y[i, j]:
                    gt = True
            if ge and gt:
                counts[i] += 1
    return counts


@numba.njit(cache=True)
def _sweep_2d(order, first, rank2, n_ranks):
    # Fenwick tree over descending ranks of the second objective.
    tree = np.zeros(n_ranks + 1, dtype=np.int64)
    weakly = np.zeros(len(order), dtype=np.int64)
    i = 0
    n = len(order)
    while i < n:
        j = i
        while j < n and first[order[j]] == first[order[i]]:
            k = rank2[order[j]] + 1
            while k <= n_ranks:
                tree[k] += 1
                k += k & (-k)
            j += 1
        for t in range(i, j):
            k = rank2[order[t]] + 1
            total = 0
            while k > 0:
                total += tree[k]
                k -= k & (-k)
            weakly[order[t]] = total
        i = j
    return weakly


def _counts_maxima_set(Y: np.ndarray) -> np.ndarray:
    """O(n log n) strict-dominator counts for two objectives.

    Points are swept by the first objective, descending, while a Fenwick tree
    over second-objective ranks answers "how many swept points are at least as
    good in the second objective". Exact copies are subtracted afterwards
    because equal vectors never dominate each other.
    """
    a = np.ascontiguousarray(Y[:, 0])
    b = Y[:, 1]
    values, rank_b = np.unique(-b, return_inverse=True)
    order = np.argsort(-a, kind="stable")
    weakly = _sweep_2d(order, a, rank_b.astype(np.int64), len(values))
    _, inverse, copies = np.unique(Y, axis=0, return_inverse=True, return_counts=True)
    return weakly - copies[inverse.ravel()]


def dominance_counts(Y, method: str = MAXIMA_SET) -> np.ndarray:
    """Number of rows of ``Y`` strictly dominating each row.

    ``maxima_set`` uses the sweep for two objectives and a sum-pruned
    pairwise scan for three or more.
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2 or len(Y) == 0:
        raise ValueError("need a non-empty (n, M) array")
    if method == BRUTE_FORCE:
        return _counts_brute_force(Y)
    if method != MAXIMA_SET:
        raise ValueError(f"unknown method {method!r}")
    if Y.shape[1] == 2:
        return _counts_maxima_set(Y)
    sums = Y.sum(axis=1)
    return _pairwise_sorted(Y, np.argsort(-sums, kind="stable"), sums)


def non_dominated_mask(Y) -> np.ndarray:
    return dominance_counts(Y) == 0


@dataclass(frozen=True)
class DominanceReport:
    ids: np.ndarray
    counts: np.ndarray

    @property
    def front_ids(self) -> list[int]:
        return [int(i) for i in self.ids[self.counts == 0]]


def dominance_numbers(archive: Archive, method: str = MAXIMA_SET, ids=None) -> DominanceReport:
    """Dominance numbers over the archive's dedup view (optionally a subset of ids)."""
    uid = archive.unique_indices(ids)
    if uid.size == 0:
        raise ValueError("archive is empty")
    counts = dominance_counts(archive.V[uid], method)
    return DominanceReport(uid, counts)


def pareto_front(archive: Archive) -> list:
    report = dominance_numbers(archive)
    return [archive[i] for i in report.front_ids]
