import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from partmoo.hypervolume import (HvConfig, ReferencePoint, hv_exact_2d, hv_exact_3d, hv_improvement_2d,
                                 hv_monte_carlo, hypervolume, log_hv_diff)

LN_01 = -2.30258509299404568401799145468
LN_FLOOR = -27.6310211159285482082158974562


def grid_hv(P, ref):
    """Exact HV by summing the cells of the coordinate grid that some point dominates."""
    P = np.asarray(P, dtype=float)
    m = P.shape[1]
    axes = [np.unique(np.concatenate([[ref[j]], P[:, j]])) for j in range(m)]
    lows = np.stack(np.meshgrid(*[a[:-1] for a in axes], indexing="ij"), -1).reshape(-1, m)
    sizes = np.stack(np.meshgrid(*[np.diff(a) for a in axes], indexing="ij"), -1).reshape(-1, m)
    covered = np.zeros(len(lows), dtype=bool)
    for p in P:
        covered |= np.all(lows < p, axis=1)
    return float(np.sum(np.prod(sizes[covered], axis=1)))


def test_2d_anchors():
    assert hv_exact_2d([(1, 1)], (0, 0)) == 1.0
    assert hv_exact_2d([(1, 3), (2, 2), (3, 1)], (0, 0)) == 6.0
    assert hv_exact_2d([(1, 3), (2, 2), (3, 1), (1, 1)], (0, 0)) == 6.0


def test_3d_anchors():
    assert hv_exact_3d([(1, 1, 1)], (0, 0, 0)) == 1.0
    assert hv_exact_3d([(1, 3, 3), (2, 2, 2), (3, 1, 1)], (0, 0, 0)) == 14.0


def test_dimension_errors():
    with pytest.raises(ValueError):
        hv_exact_2d([(1, 1, 1)], (0, 0, 0))
    with pytest.raises(ValueError):
        hv_exact_3d([(1, 1)], (0, 0))
    with pytest.raises(ValueError):
        hypervolume([(1, 1)], (0, 0, 0))


def test_monte_carlo_anchors():
    assert hv_monte_carlo([(1, 1)], (0, 0)) == pytest.approx(1.0, abs=0.01)
    assert hv_monte_carlo([(1, 3), (2, 2), (3, 1)], (0, 0)) == pytest.approx(6.0, abs=0.12)
    assert hv_monte_carlo([(-1, 2)], (0, 0)) == 0.0


def test_monte_carlo_thread_count_invariant():
    P = [(1, 3), (2, 2), (3, 1)]
    one = hv_monte_carlo(P, (0, 0), HvConfig(n_workers=1))
    eight = hv_monte_carlo(P, (0, 0), HvConfig(n_workers=8))
    assert one == eight


def test_dispatch(rng):
    assert hypervolume(np.empty((0, 2)), (0, 0)) == 0.0
    P = rng.random((30, 2))
    assert hypervolume(P, (0, 0)) == hv_exact_2d(P, (0, 0))


def test_3d_random_matches_monte_carlo_and_grid(rng):
    P = rng.random((30, 3))
    exact = hv_exact_3d(P, (0, 0, 0))
    assert exact == pytest.approx(grid_hv(P, (0, 0, 0)), rel=1e-12)
    assert hv_monte_carlo(P, (0, 0, 0)) == pytest.approx(exact, rel=0.02)


def test_4d_monte_carlo_matches_grid_oracle(rng):
    P = rng.random((20, 4))
    ref = np.zeros(4)
    assert hypervolume(P, ref) == pytest.approx(grid_hv(P, ref), rel=0.02)


def test_grid_oracle_on_the_staircase():
    assert grid_hv([(1, 3, 3), (2, 2, 2), (3, 1, 1)], (0, 0, 0)) == 14.0


@settings(max_examples=80, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 12), st.sampled_from([2, 3])),
              elements=st.integers(-2, 6).map(float)))
def test_exact_matches_grid_and_is_monotone(P):
    m = P.shape[1]
    ref = np.zeros(m)
    exact = hypervolume(P, ref)
    assert exact == pytest.approx(grid_hv(np.maximum(P, ref), ref), abs=1e-9)
    extra = np.vstack([P, np.full(m, 3.0)])
    assert hypervolume(extra, ref) >= exact - 1e-12
    assert hypervolume(P[::-1], ref) == pytest.approx(exact, abs=1e-12)


def test_improvement_matches_difference(rng):
    front = rng.random((15, 2))
    Y = rng.random((200, 2)) * 1.2
    base = hv_exact_2d(front, (0, 0))
    expected = [hv_exact_2d(np.vstack([front, y]), (0, 0)) - base for y in Y]
    np.testing.assert_allclose(hv_improvement_2d(front, (0, 0), Y), expected, atol=1e-12)


def test_log_hv_diff():
    assert log_hv_diff(1.0, 0.9) == pytest.approx(LN_01, abs=1e-12)
    assert log_hv_diff(1.0, 1.0) == pytest.approx(LN_FLOOR, abs=1e-12)
    assert log_hv_diff(1.0, 0.0) == 0.0
    with pytest.raises(ValueError):
        log_hv_diff(1.0, 1.1)


def test_reference_point_validation():
    ReferencePoint(np.zeros(2)).validate([(1, 1)])
    with pytest.raises(ValueError):
        ReferencePoint(np.zeros(2)).validate([(1, -1)])


def test_config_rejects_tiny_mc():
    with pytest.raises(ValueError):
        HvConfig(mc_samples=10)
