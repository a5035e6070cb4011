import json
import math

import numpy as np
import pytest

from freesum.errors import SizeLimitError
from freesum.homsum import (
    CoefficientTensor,
    constant_linear,
    make_family,
    mirror_counterexample,
    qn_moment,
    quadratic_star,
    random_fully_symmetric,
    random_mirror_symmetric,
    resolve_assignment,
    sliding_window,
)
from freesum.laws import from_atoms, rademacher, semicircular

from oracles import brute_qn_moment, constant_linear_by_kernel_classes

S = semicircular()
R = rademacher()
H = 1 / math.sqrt(2)


def test_predicates_examples():
    p = CoefficientTensor(2, 2, {(1, 2): H, (2, 1): H}).predicates()
    assert p.mirror_symmetric and p.fully_symmetric and p.vanishes_on_diagonals
    assert p.norm_sq == pytest.approx(1.0)
    p = mirror_counterexample(5).predicates()
    assert p.mirror_symmetric and not p.fully_symmetric and p.vanishes_on_diagonals
    assert not CoefficientTensor(1, 2, {(1, 1): 1.0}).predicates().vanishes_on_diagonals


def test_validation():
    with pytest.raises(ValueError):
        CoefficientTensor(2, 2, {(1, 3): 1.0})
    with pytest.raises(ValueError):
        CoefficientTensor(2, 2, {(1,): 1.0})
    assert len(CoefficientTensor(2, 1, {(1,): 0.0})) == 0


def test_influences():
    f = CoefficientTensor(2, 2, {(1, 2): H, (2, 1): H})
    assert f.influence_free(1) == pytest.approx(1.0)
    assert f.influence_classical(1) == pytest.approx(0.5)
    z = CoefficientTensor(3, 2, {})
    assert z.influence_free(2) == 0.0 and z.influence_classical(2) == 0.0 and z.tau == 0.0
    with pytest.raises(ValueError):
        f.influence_free(3)
    with pytest.raises(ValueError):
        f.influence_profile("other")


@pytest.mark.parametrize("N", [4, 5, 9])
def test_mirror_counterexample_influence(N):
    f = mirror_counterexample(N)
    assert f.norm_sq == pytest.approx(1.0)
    assert f.influence_free(1) == pytest.approx(1.0)
    assert f.tau == pytest.approx(1.0)


def test_profile_matches_pointwise():
    rng = np.random.default_rng(0)
    f = random_mirror_symmetric(6, 3, 5, rng)
    free = f.influence_profile("free")
    classical = f.influence_profile("classical")
    for i in range(1, 7):
        assert free.per_index[i - 1] == pytest.approx(f.influence_free(i))
        assert classical.per_index[i - 1] == pytest.approx(f.influence_classical(i))
    assert free.tau == max(free.per_index)


@pytest.mark.parametrize("seed", range(5))
def test_influence_sums(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 4))
    f = random_mirror_symmetric(6, d, 4, rng)
    assert math.fsum(f.influence_profile("classical").per_index) == pytest.approx(1.0)
    assert math.fsum(f.influence_profile("free").per_index) == pytest.approx(d)


@pytest.mark.parametrize("seed", range(4))
def test_full_symmetry_relates_influences(seed):
    rng = np.random.default_rng(seed)
    d = 2 + seed % 2
    f = random_fully_symmetric(5, d, rng)
    assert f.predicates().fully_symmetric
    for i in range(1, 6):
        assert f.influence_free(i) == pytest.approx(d * f.influence_classical(i))


def test_families():
    q = quadratic_star(3)
    assert q.entries == {(1, 2): 0.5, (1, 3): 0.5, (2, 1): 0.5, (3, 1): 0.5}
    assert constant_linear(4).norm_sq == pytest.approx(1.0)
    s = sliding_window(5, 2)
    assert s[(1, 2, 3)] == pytest.approx(1 / math.sqrt(5)) and s[(3, 2, 1)] == pytest.approx(1 / math.sqrt(5))
    assert s.norm_sq == pytest.approx(2 * 3 / 5)
    assert s.predicates().mirror_symmetric
    for bad in (lambda: quadratic_star(1), lambda: mirror_counterexample(3), lambda: sliding_window(2, 2)):
        with pytest.raises(ValueError):
            bad()
    assert make_family("sliding_window", N=6, k=1, normalize=True).norm_sq == pytest.approx(1.0)
    with pytest.raises(ValueError):
        make_family("nope", N=3)


def test_mirror_counterexample_entries():
    f = mirror_counterexample(5)
    # f(i, 1, k) = f'_4(i-1, k-1), neighbours on {1..4} weighted 1/sqrt(6)
    c = 1 / math.sqrt(6)
    assert f[(2, 1, 3)] == pytest.approx(c)
    assert f[(3, 1, 2)] == pytest.approx(c)
    assert f[(2, 1, 4)] == 0.0
    assert len(f) == 6


def test_json_round_trip():
    f = sliding_window(6, 1)
    back = CoefficientTensor.from_json(json.dumps(f.to_json()))
    assert back == f
    ref = CoefficientTensor.from_json({"family": "quadratic_star", "params": {"N": 4}})
    assert ref == quadratic_star(4)
    with pytest.raises(ValueError, match="duplicate"):
        CoefficientTensor.from_json({"N": 2, "d": 1, "entries": [{"idx": [1], "val": 1}, {"idx": [1], "val": 2}]})
    with pytest.raises(ValueError):
        CoefficientTensor.from_json({"N": 2})


def test_resolve_assignment():
    assert resolve_assignment(S, 3) == {1: S, 2: S, 3: S}
    assert resolve_assignment([S, R], 2) == {1: S, 2: R}
    assert resolve_assignment(lambda i: R, 2)[2] is R
    with pytest.raises(ValueError):
        resolve_assignment({1: S}, 2)
    with pytest.raises(ValueError):
        resolve_assignment([S], 2)


@pytest.mark.parametrize("N", [2, 4, 8, 16])
def test_clt_closed_form(N):
    assert qn_moment(constant_linear(N), R, 4) == pytest.approx(2 - 1 / N, abs=1e-12)


@pytest.mark.parametrize("N", [2, 3, 5])
def test_clt_against_kernel_class_oracle(N):
    law = from_atoms([(-1.0, 2 / 3), (2.0, 1 / 3)])
    for m in (2, 3, 4, 5):
        ref = constant_linear_by_kernel_classes(N, list(law.moments), m)
        assert qn_moment(constant_linear(N), law, m) == pytest.approx(ref, abs=1e-10)


@pytest.mark.parametrize("N", [2, 3, 6])
def test_tetilla(N):
    assert qn_moment(quadratic_star(N), S, 4) == pytest.approx(2.5, abs=1e-12)


@pytest.mark.parametrize("N", [2, 3, 5, 9])
def test_rademacher_star_closed_form(N):
    assert qn_moment(quadratic_star(N), R, 4) == pytest.approx(2 - 1 / (2 * N - 2), abs=1e-12)


def test_first_moment_vanishes():
    rng = np.random.default_rng(1)
    f = random_mirror_symmetric(5, 3, 4, rng)
    assert qn_moment(f, R, 1) == 0.0


@pytest.mark.parametrize("seed", range(6))
def test_isometry(seed):
    rng = np.random.default_rng(seed)
    f = random_mirror_symmetric(6, 1 + seed % 3, 4, rng)
    assert qn_moment(f, S, 2) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("seed", range(4))
def test_against_brute_expansion(seed):
    rng = np.random.default_rng(seed)
    f = random_mirror_symmetric(4, 2, 2, rng)
    laws = {1: S, 2: R, 3: from_atoms([(-1.0, 2 / 3), (2.0, 1 / 3)]), 4: R}
    mom = {i: list(l.moments) for i, l in laws.items()}
    for m in (2, 3):
        assert qn_moment(f, laws, m) == pytest.approx(brute_qn_moment(f.entries, 4, mom, m), abs=1e-10)


def test_size_limit_reports_count():
    with pytest.raises(SizeLimitError, match=str(64**5)):
        qn_moment(constant_linear(64), R, 5)
