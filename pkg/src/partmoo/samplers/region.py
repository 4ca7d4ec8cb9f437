"""Rejection sampling inside a partition-tree region."""
from __future__ import annotations

import numpy as np

from ..core import Archive, SearchDomain
from ..pareto import dominance_counts


def _constraint(tree, leaf_id):
    if tree is None or leaf_id is None or leaf_id == tree.root:
        return None
    return lambda X: tree.membership(leaf_id, X)


def sample_random_region(tree, leaf_id, q: int, cap: int, rng_seed, domain: SearchDomain | None = None):
    """Uniform draws kept only when they fall in ``leaf_id``'s region.

    Returns ``(candidates, fallback_used)``. When ``cap`` draws do not yield
    ``q`` members, the shortfall is filled with unconstrained uniform draws.
    """
    if q < 1 or cap < q:
        raise ValueError("need q >= 1 and cap >= q")
    domain = domain if domain is not None else tree.archive.domain
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    inside = _constraint(tree, leaf_id)
    if inside is None:
        return domain.sample_uniform(rng, q), False
    kept, drawn = [], 0
    batch = max(256, 4 * q)
    while drawn < cap and sum(len(k) for k in kept) < q:
        n = min(batch, cap - drawn)
        X = domain.sample_uniform(rng, n)
        drawn += n
        kept.append(X[inside(X)])
    kept = np.vstack(kept)[:q] if kept else np.empty((0, domain.dimension()))
    if len(kept) == q:
        return kept, False
    filler = domain.sample_uniform(rng, q - len(kept))
    return np.vstack([kept, filler]), True


def compute_fitness_dominance(candidate_values, archive: Archive) -> np.ndarray:
    """Dominance number of each candidate within the archive's dedup view plus the candidates."""
    V = np.asarray(candidate_values, dtype=float)
    if V.ndim != 2 or V.shape[1] != archive.n_objectives or np.isnan(V).any():
        raise ValueError("every candidate needs a full objective vector")
    pool = np.vstack([V, archive.V[archive.unique_indices()]]) if len(archive) else V
    return dominance_counts(pool)[:len(V)]
