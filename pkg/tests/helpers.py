import numpy as np

from partmoo.benchmarks import evaluate
from partmoo.core import Archive


def random_archive(bench, n, seed):
    """Archive of ``n`` distinct uniform designs on ``bench``."""
    rng = np.random.default_rng(seed)
    archive = Archive(bench.domain, bench.n_objectives)
    X = bench.domain.sample_uniform(rng, 4 * n)
    _, first = np.unique(X, axis=0, return_index=True)
    X = X[np.sort(first)[:n]]
    archive.extend(X, evaluate(bench, X))
    return archive
