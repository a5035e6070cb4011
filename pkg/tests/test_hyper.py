import numpy as np
import pytest

from freesum.errors import CapacityError, SizeLimitError
from freesum.homsum import CoefficientTensor, constant_linear, quadratic_star, random_mirror_symmetric
from freesum.hyper import (
    BlockGraph,
    contract_graph,
    enumerate_graphs,
    hyper_constant,
    hypercontractivity_check,
    word_bound_check,
)
from freesum.laws import from_atoms, rademacher, semicircular
from freesum.wigner_calc import DiscreteKernel, kernel_array

from oracles import count_graphs, dense_graph_contraction

# complete singleton-free graph counts, confirmed by the brute-force counter
# (C_{2,3} took a full pass over the 4 213 597 set partitions of 12 points)
FROZEN_CONSTANTS = {(1, 1): 1, (1, 2): 2, (1, 3): 6, (2, 1): 4, (2, 2): 212, (3, 1): 41, (2, 3): 41472}


def test_graph_examples():
    g = enumerate_graphs((2, 2), complete=True)
    assert [x.blocks for x in g] == [((1, 3), (2, 4)), ((1, 4), (2, 3))]
    assert len(enumerate_graphs((1, 1), complete=True)) == 1
    assert enumerate_graphs((2,), complete=True) == []
    assert len(enumerate_graphs((2, 2), complete=False)) == 7


def test_graph_flags():
    g = BlockGraph((2, 2), ((1, 3),))
    assert g.respects and g.no_singleton and not g.complete
    assert not BlockGraph((2, 2), ((1, 2),)).respects
    assert not BlockGraph((2, 2), ((1,), (2, 3, 4))).no_singleton
    with pytest.raises(ValueError):
        BlockGraph((2,), ((1, 2), (2,)))
    with pytest.raises(ValueError):
        BlockGraph((2,), ((3,),))


@pytest.mark.parametrize(
    "shape", [(1, 1), (2, 2), (1, 2, 1), (2, 2, 2), (3, 3), (1, 1, 1, 1), (2, 1, 2, 1), (3, 2, 3), (2, 2, 2, 2)]
)
@pytest.mark.parametrize("complete", [True, False])
def test_enumeration_against_brute_force(shape, complete):
    graphs = enumerate_graphs(shape, complete)
    assert len(graphs) == count_graphs(shape, complete)
    assert len({g.blocks for g in graphs}) == len(graphs)
    assert all(g.respects and g.no_singleton for g in graphs)
    assert graphs == sorted(graphs, key=lambda g: g.blocks)


@pytest.mark.parametrize("rd", [k for k in FROZEN_CONSTANTS if k != (2, 3)])
def test_hyper_constant_frozen(rd):
    assert hyper_constant(*rd) == FROZEN_CONSTANTS[rd]


def test_hyper_constant_errors():
    with pytest.raises(SizeLimitError):
        hyper_constant(3, 3)
    with pytest.raises(ValueError):
        hyper_constant(0, 1)


def _rand_kernel(rng, N, q):
    return DiscreteKernel(N, q, {tuple(int(i) for i in rng.integers(1, N + 1, size=q)): float(rng.normal()) for _ in range(3)})


def test_contract_graph_examples():
    v = DiscreteKernel(3, 1, {(1,): 1.0, (2,): 2.0})
    w = DiscreteKernel(3, 1, {(2,): 3.0, (3,): 4.0})
    assert contract_graph(BlockGraph((1, 1), ((1, 2),)), [v, w]).value == 6.0
    t = contract_graph(BlockGraph((1, 1), ()), [v, w])
    assert t.q == 2 and t.entries == {(1, 2): 3.0, (1, 3): 4.0, (2, 2): 6.0, (2, 3): 8.0}
    with pytest.raises(ValueError):
        contract_graph(BlockGraph((2,), ()), [v])


@pytest.mark.parametrize("seed", range(12))
def test_contract_graph_against_dense(seed):
    rng = np.random.default_rng(seed)
    shape = tuple(int(x) for x in rng.integers(1, 3, size=int(rng.integers(1, 4))))
    graphs = enumerate_graphs(shape, complete=False)
    if not graphs:
        return
    gamma = graphs[int(rng.integers(len(graphs)))]
    factors = [_rand_kernel(rng, 3, q) for q in shape]
    ours = kernel_array(contract_graph(gamma, factors))
    ref = dense_graph_contraction(gamma.blocks, shape, [kernel_array(f) for f in factors])
    assert np.allclose(ours, ref, atol=1e-12)


def test_diagonal_sum_inequality():
    rng = np.random.default_rng(0)
    for _ in range(50):
        g = rng.normal(size=(5, 5))
        assert np.sum(np.diag(g) ** 2) <= np.sum(g**2)


def test_hyper_examples():
    res = hypercontractivity_check(constant_linear(5), rademacher(), 1)
    assert res.moment == pytest.approx(1.0) and res.bound == pytest.approx(1.0) and res.holds
    res = hypercontractivity_check(quadratic_star(4), semicircular(), 2)
    assert res.moment == pytest.approx(2.5)
    assert res.constant == 212 and res.mu == 1430.0 and res.holds
    zero = hypercontractivity_check(CoefficientTensor(3, 2, {}), rademacher(), 1)
    assert zero.moment == 0.0 and zero.bound == 0.0 and zero.ratio == 0.0 and zero.holds


def test_hyper_requirements():
    with pytest.raises(ValueError):
        hypercontractivity_check(CoefficientTensor(2, 2, {(1, 2): 1.0}), rademacher(), 1)
    with pytest.raises(CapacityError):
        hypercontractivity_check(quadratic_star(3), semicircular(), 3)


@pytest.mark.parametrize("seed", range(8))
def test_hyper_random(seed):
    rng = np.random.default_rng(seed)
    d, r = 1 + seed % 3, 1 + seed % 2
    f = random_mirror_symmetric(5, d, 2, rng)
    order = 2 ** (r * d)
    law = [rademacher(order), semicircular(order=order), from_atoms([(-1, 2 / 3), (2, 1 / 3)], order=order)][seed % 3]
    assert hypercontractivity_check(f, law, r).ratio <= 1.0


def test_word_bound_examples():
    s = semicircular()
    eq = word_bound_check((1, 1, 1, 1), {1: s})
    assert eq.value == 2.0 and eq.mu == 2.0 and eq.holds
    assert word_bound_check((1, 2), {1: s, 2: rademacher()}).holds
    with pytest.raises(ValueError):
        word_bound_check((1, 2, 1), {1: s, 2: s})
    with pytest.raises(CapacityError):
        word_bound_check((1,) * 10, {1: rademacher(order=8)})


def test_word_bound_random_length_six():
    rng = np.random.default_rng(3)
    laws = [rademacher(), semicircular(), from_atoms([(-1, 2 / 3), (2, 1 / 3)])]
    for _ in range(40):
        word = tuple(int(x) for x in rng.integers(0, 3, size=6))
        assign = {x: laws[int(rng.integers(3))] for x in range(3)}
        assert word_bound_check(word, assign).holds
