"""Batch Bayesian sampling with Monte Carlo expected hypervolume improvement.

One GP per objective is fit on the archive. Candidates come from a
region-constrained uniform pool and the batch is picked greedily: after
each pick its posterior mean joins the front as a fantasy observation, and
the remaining pool is rescored against the enlarged front.
"""
from __future__ import annotations

import logging

import numpy as np

from ..core import Archive
from ..hypervolume import HvConfig, hv_improvement_2d, hypervolume
from ..pareto import non_dominated_mask
from .gp import GaussianProcess, GPFitError
from .region import sample_random_region

logger = logging.getLogger(__name__)


def _improvements(front, ref, Y):
    if Y.shape[1] == 2:
        return hv_improvement_2d(front, ref, Y)
    cfg = HvConfig(mc_samples=20_000)
    base = hypervolume(front, ref, cfg)
    return np.array([hypervolume(np.vstack([front, y]), ref, cfg) - base for y in Y])


def ehvi_scores(mean, std, front, ref, z, upper=None) -> np.ndarray:
    """MC estimate of the expected improvement of each candidate.

    ``mean``/``std`` are ``(n, M)`` posterior marginals, ``z`` a shared
    ``(draws, M)`` block of standard normals. Draws are clipped to
    ``[ref, upper]`` so scores never exceed the free volume of that box.
    """
    n, m = mean.shape
    Y = mean[:, None, :] + std[:, None, :] * z[None, :, :]
    Y = np.maximum(Y, ref)
    if upper is not None:
        Y = np.minimum(Y, upper)
    gains = _improvements(front, ref, Y.reshape(-1, m)).reshape(n, len(z))
    return gains.mean(axis=1)


def fit_surrogates(archive: Archive, ids=None) -> list[GaussianProcess]:
    ids = archive.unique_indices() if ids is None else ids
    X = archive.domain.to_unit(archive.X[ids])
    return [GaussianProcess().fit(X, archive.V[ids, j]) for j in range(archive.n_objectives)]


def sample_bo_region(archive: Archive, tree, leaf_id, q: int, mc_draws: int = 128,
                     candidate_pool: int = 512, rng_seed=None, hv_ref=None, upper=None,
                     domain=None):
    """Pick ``q`` candidates from ``leaf_id``'s region by greedy MC-EHVI.

    Returns ``(candidates, fallback_used, scores)``; ``scores`` holds the
    EHVI of each pick at the time it was chosen. GP failure falls back to
    plain rejection sampling with ``scores`` set to None.
    """
    if len(archive) < 4:
        raise ValueError("need at least four archived samples")
    if q < 1:
        raise ValueError("q must be at least 1")
    domain = domain if domain is not None else archive.domain
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    ref = np.asarray(hv_ref, dtype=float) if hv_ref is not None else archive.V.min(axis=0)
    try:
        models = fit_surrogates(archive)
    except GPFitError:
        logger.warning("GP fit failed; falling back to rejection sampling")
        X, _ = sample_random_region(tree, leaf_id, q, max(q, 50 * q), rng, domain)
        return X, True, None
    pool, fallback = sample_random_region(tree, leaf_id, max(candidate_pool, q),
                                          50 * max(candidate_pool, q), rng, domain)
    U = domain.to_unit(pool)
    stats = [model.predict(U, return_std=True) for model in models]
    mean = np.column_stack([s[0] for s in stats])
    std = np.column_stack([s[1] for s in stats])
    z = rng.standard_normal((mc_draws, archive.n_objectives))
    V = archive.V[archive.unique_indices()]
    front = V[non_dominated_mask(V)]
    available = np.ones(len(pool), dtype=bool)
    picks, scores = [], []
    for _ in range(q):
        score = np.full(len(pool), -np.inf)
        score[available] = ehvi_scores(mean[available], std[available], front, ref, z, upper)
        best = int(np.argmax(score))
        picks.append(best)
        scores.append(float(score[best]))
        available[best] = False
        fantasy = np.maximum(mean[best], ref)
        if upper is not None:
            fantasy = np.minimum(fantasy, upper)
        front = np.vstack([front, fantasy])
    return pool[picks], fallback, np.array(scores)
