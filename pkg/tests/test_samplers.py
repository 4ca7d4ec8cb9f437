import numpy as np
import pytest
from scipy.optimize import approx_fprime

from helpers import random_archive
from partmoo.core import Archive, SearchDomain
from partmoo.hypervolume import hv_improvement_2d, hypervolume
from partmoo.partition import PartitionParams, PartitionTree, TreeNode, build_tree
from partmoo.samplers import (GaussianProcess, GPFitError, RegionContext, cmaes_ask, cmaes_init, cmaes_tell,
                              compute_fitness_dominance, ehvi_scores, make_sampler, sample_bo_region,
                              sample_random_region)
from partmoo.samplers import bo as bo_module
from partmoo.svm import BAD, GOOD, SMOClassifier

UNIT = SearchDomain.box([0, 0], [1, 1])


def objective_tree(seed=4, depth=3):
    rng = np.random.default_rng(seed)
    archive = Archive(UNIT, 2)
    X = rng.random((150, 2))
    archive.extend(X, np.column_stack([X[:, 0], X[:, 1] ** 2]))
    return build_tree(archive, PartitionParams(max_depth=depth), np.zeros(2))


def empty_region_tree():
    archive = Archive(UNIT, 2)
    archive.extend([[0.1, 0.1], [0.9, 0.9]], [[0.0, 0.0], [1.0, 1.0]])
    svm = SMOClassifier(kernel="linear").fit(archive.X, [0, 1])
    svm.intercept_ = -1e9
    tree = PartitionTree(archive, np.zeros(2))
    tree.nodes[0] = TreeNode(0, None, "root", 0, [0, 1], svm, (1, 2))
    tree.nodes[1] = TreeNode(1, 0, GOOD, 1, [1])
    tree.nodes[2] = TreeNode(2, 0, BAD, 1, [0])
    return tree


def test_random_region_single_leaf():
    tree = build_tree(random_archive_unit(10), PartitionParams(), np.zeros(2))
    X, fallback = sample_random_region(tree, tree.root, 5, 50, 0)
    assert X.shape == (5, 2) and not fallback


def random_archive_unit(n):
    archive = Archive(UNIT, 2)
    X = np.random.default_rng(0).random((n, 2))
    archive.extend(X, X)
    return archive


def test_random_region_membership():
    tree = objective_tree()
    probe = np.random.default_rng(1).random((20000, 2))
    volumes = {leaf: tree.membership(leaf, probe).mean() for leaf in tree.leaves}
    leaf = min((l for l in volumes if volumes[l] >= 0.05), key=volumes.get)
    X, fallback = sample_random_region(tree, leaf, 5, 5000, 2)
    assert not fallback
    assert tree.membership(leaf, X).all()


def test_random_region_empty_leaf_falls_back():
    tree = empty_region_tree()
    grid = np.stack(np.meshgrid(*[np.linspace(0, 1, 317)] * 2), -1).reshape(-1, 2)
    assert not tree.membership(1, grid).any()
    X, fallback = sample_random_region(tree, 1, 5, 1000, 0)
    assert fallback and X.shape == (5, 2)
    with pytest.raises(ValueError):
        sample_random_region(tree, 1, 5, 2, 0)


def test_cmaes_degenerate_sigma_returns_mean():
    domain = SearchDomain.categorical([5] * 3)
    state = cmaes_init([1.2, 2.8, 3.4], 1e-12)
    X, _, penalty = cmaes_ask(state, None, None, 4, 100, 0, domain)
    np.testing.assert_array_equal(X, np.tile([1.0, 3.0, 3.0], (4, 1)))
    assert not penalty.any()


def test_cmaes_tell_constant_fitness():
    state = cmaes_init(np.full(4, 0.5), 0.3)
    _, G, _ = cmaes_ask(state, None, None, state.lam, 1000, 0, SearchDomain.box(np.zeros(4), np.ones(4)))
    new = cmaes_tell(state, G, np.zeros(state.lam))
    np.testing.assert_array_equal(new.mean, state.mean)
    assert new.sigma < state.sigma
    with pytest.raises(ValueError):
        cmaes_tell(state, G[:-1], np.zeros(state.lam - 1))


def test_cmaes_tell_deterministic():
    state = cmaes_init(np.full(3, 0.5), 0.2)
    domain = SearchDomain.box(np.zeros(3), np.ones(3))
    _, G, _ = cmaes_ask(state, None, None, state.lam, 1000, 3, domain)
    f = np.sum((G - 0.2) ** 2, axis=1)
    a, b = cmaes_tell(state, G, f), cmaes_tell(state, G, f)
    np.testing.assert_array_equal(a.mean, b.mean)
    np.testing.assert_array_equal(a.C, b.C)
    assert a.sigma == b.sigma


def test_cmaes_minimizes_sphere():
    domain = SearchDomain.box(np.full(5, -5.0), np.full(5, 5.0))
    state = cmaes_init(np.full(5, 3.0), 1.0)
    rng = np.random.default_rng(0)
    for _ in range(150):
        _, G, _ = cmaes_ask(state, None, None, state.lam, 10_000, rng, domain)
        state = cmaes_tell(state, G, np.sum(G**2, axis=1))
    assert np.linalg.norm(state.mean) < 1e-3


def test_cmaes_region_ask_stays_in_leaf(synthetic):
    inside, total = 0, 0
    for seed in range(20):
        archive = random_archive(synthetic, 150, seed)
        tree = build_tree(archive, PartitionParams(), synthetic.ref)
        leaf = tree.leaves[0]
        ids = tree.nodes[leaf].sample_ids
        state = cmaes_init(archive.X[ids].mean(axis=0), 0.3 * 4)
        X, _, _ = cmaes_ask(state, tree, leaf, 5, 1000, seed, synthetic.domain)
        inside += int(tree.membership(leaf, X).sum())
        total += len(X)
    assert inside / total >= 0.9


def test_fitness_dominance():
    archive = Archive(UNIT, 2)
    V = np.array([[0.2, 0.8], [0.5, 0.5], [0.8, 0.2], [0.6, 0.6]])
    archive.extend(V, V)
    assert compute_fitness_dominance([[1.0, 1.0]], archive).tolist() == [0]
    assert compute_fitness_dominance([[0.5, 0.5]], archive).tolist() == [1]
    rng = np.random.default_rng(0)
    C = rng.random((30, 2))
    pool = np.vstack([C, V])
    brute = [sum(np.all(p >= c) and np.any(p > c) for p in pool) for c in C]
    assert compute_fitness_dominance(C, archive).tolist() == brute
    with pytest.raises(ValueError):
        compute_fitness_dominance([[np.nan, 1.0]], archive)


def test_gp_gradient_and_interpolation():
    rng = np.random.default_rng(0)
    X = rng.random((25, 2))
    y = np.sin(3 * X[:, 0]) + X[:, 1]
    gp = GaussianProcess()
    theta = np.log([0.4, 1.3])
    ys = (y - y.mean()) / y.std()
    _, grad = gp._nll(theta, X, ys, 1e-6)
    numeric = approx_fprime(theta, lambda t: gp._nll(t, X, ys, 1e-6)[0], 1e-6)
    np.testing.assert_allclose(grad, numeric, rtol=1e-4, atol=1e-5)
    gp.fit(X, y)
    mean, std = gp.predict(X, return_std=True)
    np.testing.assert_allclose(mean, y, atol=1e-2)
    assert np.all(std < 0.05)
    Xt = rng.random((100, 2))
    assert np.max(np.abs(gp.predict(Xt) - (np.sin(3 * Xt[:, 0]) + Xt[:, 1]))) < 0.1


def gap_archive():
    archive = Archive(SearchDomain.box([0.0], [1.0]), 2)
    xs = np.array([0, 0.1, 0.2, 0.3, 0.7, 0.8, 0.9, 1.0])
    archive.extend(xs[:, None], np.column_stack([xs, 1 - xs]))
    return archive


def test_ehvi_grid_scan_finds_gap():
    archive = gap_archive()
    ref = np.array([-0.1, -0.1])
    models = bo_module.fit_surrogates(archive)
    grid = np.linspace(0, 1, 1000)[:, None]
    stats = [m.predict(grid, return_std=True) for m in models]
    mean = np.column_stack([s[0] for s in stats])
    std = np.column_stack([s[1] for s in stats])
    z = np.random.default_rng(0).standard_normal((256, 2))
    scores = ehvi_scores(mean, std, archive.V, ref, z)
    assert 0.3 < grid[np.argmax(scores), 0] < 0.7
    X, fallback, picked = sample_bo_region(archive, None, None, 1, rng_seed=0, hv_ref=ref)
    assert 0.3 < X[0, 0] < 0.7 and not fallback
    assert picked[0] > 0


def test_ehvi_at_archived_point_is_negligible():
    archive = gap_archive()
    ref = np.array([-0.1, -0.1])
    models = bo_module.fit_surrogates(archive)
    at = archive.X[[2]]
    mean = np.column_stack([m.predict(at) for m in models])
    std = np.column_stack([m.predict(at, return_std=True)[1] for m in models])
    z = np.random.default_rng(0).standard_normal((256, 2))
    score = ehvi_scores(mean, std, archive.V, ref, z)[0]
    assert score <= 1e-3 * hypervolume(archive.V, ref)


def test_ehvi_without_noise_is_exact_improvement():
    front = np.array([[0.2, 0.8], [0.8, 0.2]])
    mean = np.array([[0.5, 0.5], [0.1, 0.1]])
    z = np.random.default_rng(0).standard_normal((16, 2))
    got = ehvi_scores(mean, np.zeros_like(mean), front, np.zeros(2), z)
    np.testing.assert_allclose(got, hv_improvement_2d(front, np.zeros(2), mean))


def test_bo_batch_is_distinct_and_in_region():
    tree = objective_tree()
    leaf = tree.leaves[0]
    X, fallback, scores = sample_bo_region(tree.archive, tree, leaf, 3, rng_seed=1, hv_ref=np.zeros(2))
    assert len({x.tobytes() for x in X}) == 3
    assert tree.membership(leaf, X).all() and not fallback
    assert np.all(np.diff(scores) <= 1e-12)


def test_bo_gp_failure_falls_back(monkeypatch):
    def boom(*args, **kwargs):
        raise GPFitError("singular")
    monkeypatch.setattr(bo_module, "fit_surrogates", boom)
    X, fallback, scores = sample_bo_region(gap_archive(), None, None, 3, rng_seed=0)
    assert X.shape == (3, 1) and fallback and scores is None


@pytest.mark.parametrize("kind", ["random", "cmaes", "bo"])
def test_samplers_deterministic(kind, synthetic):
    archive = random_archive(synthetic, 120, 0)
    tree = build_tree(archive, PartitionParams(), synthetic.ref)
    ctx = RegionContext(archive, synthetic.domain, tree, tree.leaves[0], synthetic.ref, synthetic.norm.upper)
    a = make_sampler(kind).propose(ctx, 5, np.random.default_rng(9))
    b = make_sampler(kind).propose(ctx, 5, np.random.default_rng(9))
    np.testing.assert_array_equal(a.X, b.X)
    assert synthetic.domain.contains_many(a.X).all()


def test_unknown_sampler():
    with pytest.raises(ValueError):
        make_sampler("grid")
