import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from partmoo.core import (Archive, ClampWarning, NormalizationSpec, ObjectiveSpec, SearchDomain,
                          denormalize_objectives, domain_contains, normalize_objectives)

ACC = ObjectiveSpec("accuracy", "maximize", 0.0, 1.0, (0.0, 1.0))
FLOPS = ObjectiveSpec("flops", "minimize", 10.0, 250.0, (-1.0, 0.0))
SPEC = NormalizationSpec((ACC, FLOPS))


def test_maximize_identity():
    assert normalize_objectives([0.95, 10.0], SPEC)[0] == pytest.approx(0.95)


def test_minimize_endpoints():
    assert normalize_objectives([0.5, 250.0], SPEC)[1] == pytest.approx(-1.0)
    assert normalize_objectives([0.5, 10.0], SPEC)[1] == pytest.approx(0.0)


def test_length_mismatch():
    with pytest.raises(ValueError):
        normalize_objectives([0.5], SPEC)


def test_out_of_range_is_clamped_with_warning():
    with pytest.warns(ClampWarning):
        out = normalize_objectives([1.5, 5.0], SPEC)
    np.testing.assert_allclose(out, [1.0, 0.0])


def test_invalid_specs():
    with pytest.raises(ValueError):
        ObjectiveSpec("x", "maximize", 1.0, 1.0)
    with pytest.raises(ValueError):
        ObjectiveSpec("x", "maximize", 0.0, 1.0, (1.0, 0.0))
    with pytest.raises(ValueError):
        ObjectiveSpec("x", "up", 0.0, 1.0)


@settings(max_examples=200, deadline=None)
@given(a=st.floats(10.0, 250.0), b=st.floats(10.0, 250.0), acc=st.floats(0.0, 1.0))
def test_minimize_order_reversal_and_inverse(a, b, acc):
    na = normalize_objectives([acc, a], SPEC)
    nb = normalize_objectives([acc, b], SPEC)
    if a < b:
        assert na[1] > nb[1]
    back = denormalize_objectives(na, SPEC)
    np.testing.assert_allclose(back, [acc, a], rtol=1e-12, atol=1e-12)


def test_domain_contains_examples():
    box = SearchDomain.box([0, 0], [1, 1])
    assert domain_contains(box, [0.5, 0.5])
    assert domain_contains(box, [1.0, 0.0])
    assert not domain_contains(box, [1.01, 0.0])
    cat = SearchDomain.categorical([5] * 6)
    assert domain_contains(cat, [0, 4, 2, 1, 3, 0])
    assert not domain_contains(cat, [0, 5, 0, 0, 0, 0])
    assert not domain_contains(cat, [0, 1.5, 0, 0, 0, 0])
    with pytest.raises(ValueError):
        domain_contains(cat, [0, 1])


@given(st.lists(st.floats(allow_nan=True, allow_infinity=True), min_size=2, max_size=2))
def test_domain_contains_is_total(x):
    assert domain_contains(SearchDomain.box([0, 0], [1, 1]), x) in (True, False)


def test_domain_invariants():
    with pytest.raises(ValueError):
        SearchDomain.box([0, 1], [1, 1])
    with pytest.raises(ValueError):
        SearchDomain.categorical([5, 1])
    assert SearchDomain.categorical([5] * 6).dimension() == 6
    assert SearchDomain.categorical([5] * 6).size() == 15625


def test_archive_keeps_duplicates_but_dedups_view():
    archive = Archive(SearchDomain.categorical([3, 3]), 2)
    archive.add([0, 1], [0.1, 0.2])
    archive.add([2, 2], [0.3, 0.1])
    archive.add([0, 1], [0.1, 0.2])
    assert len(archive) == 3
    assert archive.n_duplicates == 1
    assert archive.duplicate_flags == [False, False, True]
    assert archive.unique_indices().tolist() == [0, 1]
    assert [s.id for s in archive] == [0, 1, 2]
    with pytest.raises(ValueError):
        archive.add([3, 0], [0.0, 0.0])
    with pytest.raises(ValueError):
        archive.add([0, 0], [np.nan, 0.0])


def test_sample_uniform_stays_in_domain(rng):
    for domain in (SearchDomain.box([-1, 2], [0, 5]), SearchDomain.categorical([2, 7, 3])):
        X = domain.sample_uniform(rng, 500)
        assert domain.contains_many(X).all()
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        SearchDomain.categorical([4, 4]).clip([[5.2, -1.0]])
