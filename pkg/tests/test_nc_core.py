import math

import pytest
from hypothesis import given, settings, strategies as st

from freesum.errors import SizeLimitError
from freesum.nc_core import (
    SetPartition,
    catalan,
    enumerate_nc,
    enumerate_nc_pairings,
    free_cumulants_to_moments,
    is_noncrossing,
    is_refinement,
    kernel_of,
    moments_to_free_cumulants,
)

from oracles import cumulants_from_moments, nc_partitions, set_partitions


@pytest.mark.parametrize("n", range(1, 11))
def test_nc_count_is_catalan(n):
    parts = enumerate_nc(n)
    assert len(parts) == catalan(n)
    assert len(set(parts)) == len(parts)
    assert all(p.is_noncrossing for p in parts)


@pytest.mark.parametrize("n", range(1, 9))
def test_nc_matches_brute_force(n):
    ours = {p.blocks for p in enumerate_nc(n)}
    ref = {tuple(tuple(b) for b in p) for p in nc_partitions(n)}
    assert ours == ref


def test_small_enumerations():
    assert [p.blocks for p in enumerate_nc(1)] == [((1,),)]
    assert len(enumerate_nc(4)) == 14
    pairs = enumerate_nc_pairings(4)
    assert sorted(p.blocks for p in pairs) == [((1, 2), (3, 4)), ((1, 4), (2, 3))]
    assert enumerate_nc_pairings(5) == []


@pytest.mark.parametrize("k", range(1, 8))
def test_pairings_count(k):
    assert len(enumerate_nc_pairings(2 * k)) == catalan(k)


def test_caps():
    with pytest.raises(SizeLimitError):
        enumerate_nc(15)
    with pytest.raises(ValueError):
        enumerate_nc(0)


def test_crossing_predicate():
    assert not is_noncrossing(SetPartition.from_blocks([(1, 3), (2, 4)]))
    assert is_noncrossing(SetPartition.from_blocks([(1, 4), (2, 3)]))
    assert is_noncrossing(SetPartition.from_blocks([(1, 2, 5), (3, 4), (6,)]))
    assert not is_noncrossing(SetPartition.from_blocks([(1, 3, 5), (2, 6), (4,)]))


@pytest.mark.parametrize("n", range(1, 8))
def test_crossing_predicate_against_brute_force(n):
    nc = {tuple(tuple(b) for b in p) for p in nc_partitions(n)}
    for p in set_partitions(n):
        sp = SetPartition(n, tuple(tuple(b) for b in p))
        assert is_noncrossing(sp) == (sp.blocks in nc)


def test_partition_validation():
    with pytest.raises(ValueError):
        SetPartition(3, ((1, 2),))
    with pytest.raises(ValueError):
        SetPartition(2, ((1, 2), (2,)))


def test_kernel_and_refinement():
    k = kernel_of((1, 2, 1, 3))
    assert k.blocks == ((1, 3), (2,), (4,))
    assert is_refinement(SetPartition.from_blocks([(1,), (3,), (2,), (4,)]), k)
    assert not is_refinement(SetPartition.from_blocks([(1, 2), (3, 4)]), k)
    with pytest.raises(ValueError):
        is_refinement(k, SetPartition.from_blocks([(1, 2)]))


def test_semicircular_transform():
    m = free_cumulants_to_moments([0, 1, 0, 0, 0, 0, 0, 0])
    assert m == [0, 1, 0, 2, 0, 5, 0, 14]


def test_rademacher_cumulants():
    kappa = moments_to_free_cumulants([0, 1, 0, 1, 0, 1, 0, 1])
    assert kappa == pytest.approx([0, 1, 0, -1, 0, 2, 0, -5], abs=1e-12)


def test_single_nontrivial_fourth_cumulant():
    assert free_cumulants_to_moments([0, 1, 0, -1])[3] == pytest.approx(1.0)


def test_empty_transform():
    assert free_cumulants_to_moments([]) == []
    assert moments_to_free_cumulants([]) == []


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-2, 2, allow_nan=False), min_size=1, max_size=10))
def test_transform_round_trip(kappa):
    back = moments_to_free_cumulants(free_cumulants_to_moments(kappa))
    scale = max(1.0, max(abs(x) for x in free_cumulants_to_moments(kappa)))
    assert back == pytest.approx(kappa, abs=1e-9 * scale)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-2, 2, allow_nan=False), min_size=1, max_size=7))
def test_transform_matches_lattice_sum(moments):
    ref = cumulants_from_moments(moments)
    scale = max(1.0, max(abs(x) for x in ref))
    assert moments_to_free_cumulants(moments) == pytest.approx(ref, abs=1e-9 * scale)


def test_catalan_values():
    assert [catalan(k) for k in range(8)] == [1, 1, 2, 5, 14, 42, 132, 429]
    assert catalan(20) == math.comb(40, 20) // 21
