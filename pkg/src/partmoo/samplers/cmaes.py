"""(mu/mu_w, lambda)-CMA-ES with region-constrained sampling.

Fitness is minimized; the optimizer loop feeds dominance numbers so lower
means closer to the current front.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..core import SearchDomain
from .region import _constraint

MIN_EIGENVALUE = 1e-10


@dataclass
class CmaesState:
    mean: np.ndarray
    sigma: float
    C: np.ndarray
    p_sigma: np.ndarray
    p_c: np.ndarray
    lam: int
    mu: int
    weights: np.ndarray
    generation: int = 0
    constants: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return self.mean.size

    def eigen(self):
        vals, vecs = np.linalg.eigh(self.C)
        return np.maximum(vals, MIN_EIGENVALUE), vecs


def cmaes_init(mean, sigma: float, lam: int | None = None) -> CmaesState:
    mean = np.asarray(mean, dtype=float).copy()
    n = mean.size
    lam = lam or 4 + int(math.floor(3 * math.log(n)))
    mu = lam // 2
    raw = math.log((lam + 1) / 2) - np.log(np.arange(1, mu + 1))
    weights = raw / raw.sum()
    mueff = 1.0 / np.sum(weights**2)
    cc = (4 + mueff / n) / (n + 4 + 2 * mueff / n)
    cs = (mueff + 2) / (n + mueff + 5)
    c1 = 2 / ((n + 1.3) ** 2 + mueff)
    cmu = min(1 - c1, 2 * (mueff - 2 + 1 / mueff) / ((n + 2) ** 2 + mueff))
    damps = 1 + 2 * max(0.0, math.sqrt((mueff - 1) / (n + 1)) - 1) + cs
    chi_n = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n**2))
    constants = dict(mueff=mueff, cc=cc, cs=cs, c1=c1, cmu=cmu, damps=damps, chi_n=chi_n)
    return CmaesState(mean, float(sigma), np.eye(n), np.zeros(n), np.zeros(n), lam, mu, weights,
                      0, constants)


def _draw(state: CmaesState, rng, n):
    vals, vecs = state.eigen()
    Z = rng.standard_normal((n, state.dim))
    return state.mean + state.sigma * (Z * np.sqrt(vals)) @ vecs.T


def cmaes_ask(state: CmaesState, tree, leaf_id, q: int, cap: int, rng_seed,
              domain: SearchDomain | None = None):
    """Draw ``q`` candidates from the search distribution.

    Draws outside the domain box or the leaf region are redrawn until ``cap``
    draws are spent; the shortfall is then filled with clamped draws marked
    in the returned penalty mask. Returns ``(decoded, genotypes, penalty)``
    where ``decoded`` is clamped to the domain (and rounded for categorical
    domains) and ``genotypes`` are the raw draws to pass back to
    :func:`cmaes_tell`.
    """
    domain = domain if domain is not None else tree.archive.domain
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    inside = _constraint(tree, leaf_id)
    good_raw, spare_raw, drawn = [], [], 0
    while len(good_raw) < q and drawn < max(cap, q):
        n = min(max(4 * q, 32), max(cap, q) - drawn)
        G = _draw(state, rng, n)
        drawn += n
        ok = np.all((G >= domain.lower) & (G <= domain.upper), axis=1)
        if inside is not None and ok.any():
            idx = np.flatnonzero(ok)
            ok[idx] = inside(domain.clip(G[idx]))
        good_raw.extend(G[ok])
        spare_raw.extend(G[~ok])
    good_raw = good_raw[:q]
    short = q - len(good_raw)
    raw = np.array(good_raw + spare_raw[:short]).reshape(q, state.dim)
    penalty = np.zeros(q, dtype=bool)
    penalty[len(good_raw):] = True
    return domain.clip(raw), raw, penalty


def cmaes_tell(state: CmaesState, genotypes, fitness) -> CmaesState:
    """One generation update from ``lam`` evaluated genotypes (lower fitness is better).

    A population with identical fitness carries no ranking information: the
    mean stays put and the step size contracts through the decaying path.
    """
    X = np.asarray(genotypes, dtype=float)
    f = np.asarray(fitness, dtype=float)
    if len(X) != state.lam or len(f) != state.lam:
        raise ValueError(f"expected {state.lam} evaluated candidates, got {len(X)}")
    k = state.constants
    n = state.dim
    order = np.argsort(f, kind="stable")
    Y = (X[order] - state.mean) / state.sigma
    Y_mu = Y[:state.mu]
    informative = not np.all(f == f[0])
    y_w = state.weights @ Y_mu if informative else np.zeros(n)

    vals, vecs = state.eigen()
    inv_sqrt = vecs @ np.diag(1 / np.sqrt(vals)) @ vecs.T
    g = state.generation + 1
    p_sigma = (1 - k["cs"]) * state.p_sigma + math.sqrt(k["cs"] * (2 - k["cs"]) * k["mueff"]) * (inv_sqrt @ y_w)
    norm_ps = np.linalg.norm(p_sigma)
    h_sigma = norm_ps / math.sqrt(1 - (1 - k["cs"]) ** (2 * g)) < (1.4 + 2 / (n + 1)) * k["chi_n"]
    p_c = (1 - k["cc"]) * state.p_c + h_sigma * math.sqrt(k["cc"] * (2 - k["cc"]) * k["mueff"]) * y_w
    rank_mu = (Y_mu.T * state.weights) @ Y_mu if informative else state.C
    C = ((1 - k["c1"] - k["cmu"]) * state.C
         + k["c1"] * (np.outer(p_c, p_c) + (1 - h_sigma) * k["cc"] * (2 - k["cc"]) * state.C)
         + k["cmu"] * rank_mu)
    C = (C + C.T) / 2
    vals, vecs = np.linalg.eigh(C)
    if vals.min() <= MIN_EIGENVALUE:
        C = vecs @ np.diag(np.maximum(vals, MIN_EIGENVALUE)) @ vecs.T
        C = (C + C.T) / 2
    sigma = state.sigma * math.exp((k["cs"] / k["damps"]) * (norm_ps / k["chi_n"] - 1))
    return replace(state, mean=state.mean + state.sigma * y_w, sigma=sigma, C=C, p_sigma=p_sigma,
                   p_c=p_c, generation=g)
