"""Candidate generators used inside a selected region (or the whole domain)."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bo import ehvi_scores, sample_bo_region
from .cmaes import CmaesState, cmaes_ask, cmaes_init, cmaes_tell
from .gp import GaussianProcess, GPFitError
from .region import compute_fitness_dominance, sample_random_region

SAMPLER_KINDS = ("random", "cmaes", "bo")


@dataclass
class Proposal:
    X: np.ndarray
    flags: np.ndarray
    genotypes: np.ndarray | None = None


@dataclass
class RegionContext:
    """Everything a sampler needs to know about the current iteration."""

    archive: object
    domain: object
    tree: object = None
    leaf_id: int | None = None
    ref: np.ndarray | None = None
    upper: np.ndarray | None = None


class RandomSampler:
    def __init__(self, cap_factor: int = 1000):
        self.cap_factor = cap_factor

    def propose(self, ctx: RegionContext, n: int, rng) -> Proposal:
        X, fallback = sample_random_region(ctx.tree, ctx.leaf_id, n, self.cap_factor * n, rng,
                                           ctx.domain)
        return Proposal(X, np.full(n, fallback))

    def observe(self, ctx: RegionContext, proposal: Proposal, ids) -> None:
        pass


class CmaesSampler:
    """CMA-ES over the whole domain, or warm-started inside a selected leaf.

    Whole-domain mode keeps one persistent state whose generations span
    optimizer iterations: evaluated proposals join a pending generation and
    once ``lam`` are pending the state is told their dominance numbers
    (penalized draws get ``+len(archive)``).

    Region mode starts a fresh state each iteration at the centroid of the
    leaf's samples, tells it those samples ranked by their current dominance
    numbers (one generation with ``lam = n_leaf``), then asks inside the leaf.
    """

    def __init__(self, sigma_fraction: float = 0.3, cap_factor: int = 200):
        self.sigma_fraction = sigma_fraction
        self.cap_factor = cap_factor
        self.state: CmaesState | None = None
        self._pending: list = []

    def _sigma0(self, ctx):
        return self.sigma_fraction * float(np.mean(ctx.domain.widths))

    def _region_state(self, ctx: RegionContext) -> CmaesState:
        archive = ctx.archive
        ids = list(ctx.tree.nodes[ctx.leaf_id].sample_ids)
        X = archive.X[ids]
        state = cmaes_init(X.mean(axis=0), self._sigma0(ctx), lam=max(len(ids), 2))
        if len(ids) >= 2:
            state = cmaes_tell(state, X, _dominance_against(archive, archive.V[ids]))
        return state

    def propose(self, ctx: RegionContext, n: int, rng) -> Proposal:
        if ctx.tree is not None and ctx.leaf_id is not None:
            state = self._region_state(ctx)
        else:
            if self.state is None:
                X = ctx.archive.X[ctx.archive.unique_indices()]
                self.state = cmaes_init(X.mean(axis=0), self._sigma0(ctx))
            state = self.state
        X, G, penalty = cmaes_ask(state, ctx.tree, ctx.leaf_id, n, self.cap_factor * n, rng,
                                  ctx.domain)
        return Proposal(X, penalty, G)

    def observe(self, ctx: RegionContext, proposal: Proposal, ids) -> None:
        if ctx.tree is not None and ctx.leaf_id is not None:
            return
        for k, sid in enumerate(ids):
            self._pending.append((proposal.genotypes[k], bool(proposal.flags[k]), sid))
        lam = self.state.lam
        while len(self._pending) >= lam:
            batch, self._pending = self._pending[:lam], self._pending[lam:]
            archive = ctx.archive
            counts = _dominance_against(archive, archive.V[[sid for _, _, sid in batch]])
            fitness = counts + len(archive) * np.array([flag for _, flag, _ in batch])
            self.state = cmaes_tell(self.state, np.array([g for g, _, _ in batch]), fitness)


def _dominance_against(archive, V) -> np.ndarray:
    """Strict dominators of each row of ``V`` among the archive's unique samples."""
    pool = archive.V[archive.unique_indices()]
    return np.array([np.sum(np.all(pool >= v, axis=1) & np.any(pool > v, axis=1)) for v in V])


class BoSampler:
    def __init__(self, mc_draws: int = 128, candidate_pool: int = 512):
        self.mc_draws = mc_draws
        self.candidate_pool = candidate_pool

    def propose(self, ctx: RegionContext, n: int, rng) -> Proposal:
        X, fallback, _ = sample_bo_region(ctx.archive, ctx.tree, ctx.leaf_id, n, self.mc_draws,
                                          self.candidate_pool, rng, ctx.ref, ctx.upper, ctx.domain)
        return Proposal(X, np.full(n, fallback))

    def observe(self, ctx: RegionContext, proposal: Proposal, ids) -> None:
        pass


def make_sampler(kind: str):
    if kind == "random":
        return RandomSampler()
    if kind == "cmaes":
        return CmaesSampler()
    if kind == "bo":
        return BoSampler()
    raise ValueError(f"unknown sampler {kind!r}; expected one of {SAMPLER_KINDS}")
