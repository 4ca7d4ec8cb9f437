"""Hypervolume indicator: exact sweeps for two and three objectives, Monte Carlo beyond.

Points are maximized and the reference point is the lower corner. Points
that do not strictly exceed the reference in every objective contribute
nothing.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .pareto import non_dominated_mask

LOG_FLOOR = 1e-12
_MC_CHUNK = 16384


@dataclass(frozen=True)
class HvConfig:
    mc_samples: int = 200_000
    mc_seed: int = 0
    exact_max_m: int = 3
    n_workers: int = 1

    def __post_init__(self):
        if self.mc_samples < 1000:
            raise ValueError("mc_samples must be at least 1000")


@dataclass(frozen=True)
class ReferencePoint:
    r: np.ndarray

    def validate(self, points) -> None:
        """Raise if any point lies below the reference in some objective."""
        points = np.asarray(points, dtype=float)
        if points.size and np.any(points < self.r):
            raise ValueError("reference point is not below every point")


def _prepare(points, ref, m: int | None = None):
    ref = np.asarray(ref, dtype=float).ravel()
    P = np.asarray(points, dtype=float)
    if P.size == 0:
        return np.empty((0, ref.size)), ref
    P = P.reshape(-1, P.shape[-1])
    if P.shape[1] != ref.size:
        raise ValueError(f"reference has {ref.size} components, points have {P.shape[1]}")
    if m is not None and ref.size != m:
        raise ValueError(f"expected {m} objectives, got {ref.size}")
    P = P[np.all(P > ref, axis=1)]
    if len(P) > 1:
        P = np.unique(P, axis=0)
        P = P[non_dominated_mask(P)]
    return P, ref


def _staircase_area(P: np.ndarray, ref: np.ndarray) -> float:
    # P: mutually non-dominated, all above ref
    order = np.argsort(-P[:, 0], kind="stable")
    x = P[order, 0]
    y = P[order, 1]
    x_next = np.append(x[1:], ref[0])
    return float(np.sum((x - x_next) * (y - ref[1])))


def hv_exact_2d(points, ref) -> float:
    """Area dominated by ``points`` above ``ref`` for two objectives."""
    ref_arr = np.asarray(ref, dtype=float).ravel()
    if ref_arr.size != 2:
        raise ValueError("hv_exact_2d needs two objectives")
    P, ref_arr = _prepare(points, ref_arr, 2)
    if len(P) == 0:
        return 0.0
    return _staircase_area(P, ref_arr)


def hv_exact_3d(points, ref) -> float:
    """Volume dominated by ``points`` above ``ref`` for three objectives.

    Sweeps the third objective from the top; between consecutive levels the
    slab volume is the two-objective area of the points seen so far.
    """
    ref_arr = np.asarray(ref, dtype=float).ravel()
    if ref_arr.size != 3:
        raise ValueError("hv_exact_3d needs three objectives")
    P, ref_arr = _prepare(points, ref_arr, 3)
    if len(P) == 0:
        return 0.0
    order = np.argsort(-P[:, 2], kind="stable")
    P = P[order]
    z_levels = np.append(P[1:, 2], ref_arr[2])
    volume = 0.0
    front = np.empty((0, 2))
    for k in range(len(P)):
        front = np.vstack([front, P[k, :2]])
        front = front[non_dominated_mask(front)] if len(front) > 1 else front
        height = P[k, 2] - z_levels[k]
        if height > 0:
            volume += _staircase_area(front, ref_arr[:2]) * height
    return float(volume)


def _mc_chunk_hits(P, lo, hi, seed_seq, n):
    rng = np.random.default_rng(seed_seq)
    U = lo + rng.random((n, lo.size)) * (hi - lo)
    hits = 0
    for start in range(0, n, 4096):
        block = U[start:start + 4096]
        dominated = np.zeros(len(block), dtype=bool)
        for p in P:
            dominated |= np.all(block <= p, axis=1)
        hits += int(dominated.sum())
    return hits


def hv_monte_carlo(points, ref, cfg: HvConfig = HvConfig()) -> float:
    """Uniform Monte Carlo estimate inside the box spanned by ``ref`` and the point maxima.

    The draw stream is split into fixed-size chunks seeded from ``cfg.mc_seed``,
    so the estimate does not depend on ``cfg.n_workers``.
    """
    P, ref_arr = _prepare(points, ref)
    if len(P) == 0:
        return 0.0
    hi = P.max(axis=0)
    box = float(np.prod(hi - ref_arr))
    sizes = [_MC_CHUNK] * (cfg.mc_samples // _MC_CHUNK)
    if cfg.mc_samples % _MC_CHUNK:
        sizes.append(cfg.mc_samples % _MC_CHUNK)
    seeds = np.random.SeedSequence(cfg.mc_seed).spawn(len(sizes))
    args = [(P, ref_arr, hi, s, n) for s, n in zip(seeds, sizes)]
    if cfg.n_workers > 1:
        with ThreadPoolExecutor(cfg.n_workers) as pool:
            hits = list(pool.map(lambda a: _mc_chunk_hits(*a), args))
    else:
        hits = [_mc_chunk_hits(*a) for a in args]
    return box * sum(hits) / cfg.mc_samples


def hypervolume(points, ref, cfg: HvConfig = HvConfig()) -> float:
    ref_arr = np.asarray(ref, dtype=float).ravel()
    P = np.asarray(points, dtype=float)
    if P.size == 0:
        return 0.0
    P = P.reshape(-1, P.shape[-1])
    if P.shape[1] != ref_arr.size:
        raise ValueError(f"reference has {ref_arr.size} components, points have {P.shape[1]}")
    m = ref_arr.size
    if m < 2:
        raise ValueError("hypervolume needs at least two objectives")
    if m == 2 and cfg.exact_max_m >= 2:
        return hv_exact_2d(P, ref_arr)
    if m == 3 and cfg.exact_max_m >= 3:
        return hv_exact_3d(P, ref_arr)
    return hv_monte_carlo(P, ref_arr, cfg)


def hv_improvement_2d(front, ref, Y) -> np.ndarray:
    """Hypervolume gained by adding each row of ``Y`` (separately) to ``front``.

    Vectorized over ``Y``; uses HVI(y) = vol[ref, y] - HV({min(y, p) : p in front}).
    """
    ref = np.asarray(ref, dtype=float)
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    own = np.prod(np.clip(Y - ref, 0.0, None), axis=1)
    P, _ = _prepare(front, ref, 2)
    if len(P) == 0:
        return own
    order = np.argsort(-P[:, 0], kind="stable")
    a, b = P[order, 0], P[order, 1]
    A = np.maximum(np.minimum(Y[:, :1], a[None, :]), ref[0])
    B = np.maximum(np.minimum(Y[:, 1:2], b[None, :]), ref[1])
    A_next = np.concatenate([A[:, 1:], np.full((len(Y), 1), ref[0])], axis=1)
    covered = np.sum((A - A_next) * (B - ref[1]), axis=1)
    return np.clip(own - covered, 0.0, None)


def log_hv_diff(hv_max: float, hv_cur: float) -> float:
    """``log(hv_max - hv_cur)``, floored at ``log(1e-12)``."""
    if hv_cur > hv_max + 1e-9:
        raise ValueError(f"current hypervolume {hv_cur} exceeds the stated maximum {hv_max}")
    return math.log(max(hv_max - hv_cur, LOG_FLOOR))
