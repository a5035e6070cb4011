import math

import numpy as np
import pytest

from freesum.errors import SizeLimitError
from freesum.homsum import CoefficientTensor, constant_linear, quadratic_star, random_mirror_symmetric
from freesum.laws import from_atoms, from_moments, rademacher, semicircular
from freesum.rmt_oracle import (
    MatrixModel,
    _evaluate,
    atom_counts,
    conjugated_atomic,
    estimate_qn_moment,
    estimate_trace_moment,
    gue,
    haar_unitary,
    model_for_law,
    sample_family,
)


def test_atom_counts():
    assert atom_counts([0.5, 0.5], 7) in ([4, 3], [3, 4])
    assert sum(atom_counts([1 / 3, 1 / 3, 1 / 3], 512)) == 512
    assert atom_counts([0.25, 0.75], 8) == [2, 6]


def test_model_validation():
    with pytest.raises(ValueError):
        MatrixModel("goe", 4)
    with pytest.raises(ValueError):
        conjugated_atomic(4, [(1.0, 0.5), (-1.0, 0.4)])
    assert len(conjugated_atomic(9, [(1.0, 0.5), (-1.0, 0.5)]).diagonal) == 9


def test_model_for_law():
    assert model_for_law(semicircular(), 8).kind == "gue"
    assert model_for_law(rademacher(), 8).kind == "atomic"
    m = model_for_law(from_atoms([(-1.0, 2 / 3), (2.0, 1 / 3)]), 8)
    assert m.atoms == ((-1.0, 2 / 3), (2.0, 1 / 3))
    with pytest.raises(ValueError):
        model_for_law(from_moments([0.0, 1.0]), 8)


def test_draws_are_hermitian_with_right_spectrum():
    A, B = sample_family([gue(32), conjugated_atomic(32, [(2.0, 0.25), (-1.0, 0.75)])], seed=1)
    assert np.allclose(A, A.conj().T) and np.allclose(B, B.conj().T)
    eig = np.sort(np.linalg.eigvalsh(B))
    assert np.allclose(eig, np.sort(np.repeat([2.0, -1.0], [8, 24])), atol=1e-10)


def test_rademacher_model_squares_to_identity():
    (X,) = sample_family([conjugated_atomic(64, [(1.0, 0.5), (-1.0, 0.5)])], seed=3)
    assert np.allclose(X @ X, np.eye(64), atol=1e-12)
    est = estimate_trace_moment(conjugated_atomic(64, [(1.0, 0.5), (-1.0, 0.5)]), 2, samples=3, seed=0)
    assert est.mean == pytest.approx(1.0, abs=1e-12)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        sample_family([gue(4), gue(5)], seed=0)


def test_haar_unitary():
    rng = np.random.default_rng(0)
    U = haar_unitary(16, rng)
    assert np.allclose(U.conj().T @ U, np.eye(16), atol=1e-12)
    V = haar_unitary(16, rng, cols=5)
    assert V.shape == (16, 5) and np.allclose(V.conj().T @ V, np.eye(5), atol=1e-12)


def test_haar_phases_are_uniform():
    # the uncorrected QR leaves a positive diagonal in R, biasing diag(Q);
    # after correction the mean of U_11 is 0
    rng = np.random.default_rng(1)
    vals = np.array([haar_unitary(4, rng)[0, 0] for _ in range(4000)])
    assert abs(vals.mean()) < 0.03


def test_determinism():
    a = sample_family([gue(16), conjugated_atomic(16, [(1.0, 0.5), (-1.0, 0.5)])], seed=9, draw=2)
    b = sample_family([gue(16), conjugated_atomic(16, [(1.0, 0.5), (-1.0, 0.5)])], seed=9, draw=2)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    f = quadratic_star(3)
    e1 = estimate_qn_moment(f, gue(24), 4, samples=6, seed=5)
    e2 = estimate_qn_moment(f, gue(24), 4, samples=6, seed=5, threads=3)
    assert e1 == e2


def test_evaluate_matches_naive_products():
    rng = np.random.default_rng(2)
    f = random_mirror_symmetric(5, 3, 6, rng)
    mats = dict(zip(range(1, 6), sample_family([gue(6)] * 5, seed=0)))
    naive = sum(v * mats[k[0]] @ mats[k[1]] @ mats[k[2]] for k, v in f.entries.items())
    assert np.allclose(_evaluate(list(f.entries.items()), mats), naive, atol=1e-12)


def test_gue_moments_small():
    ests = estimate_trace_moment(gue(128), [1, 2, 3, 4], samples=40, seed=0)
    for m, e in zip([1, 2, 3, 4], ests):
        exact = [0.0, 1.0, 0.0, 2.0][m - 1]
        assert abs(e.mean - exact) <= 3 * e.stderr + 1 / 128
    assert abs(ests[0].mean) <= 3 * ests[0].stderr
    assert abs(ests[2].mean) <= 3 * ests[2].stderr


def test_constant_linear_gue():
    est = estimate_qn_moment(constant_linear(3), gue(128), 4, samples=20, seed=1)
    assert abs(est.mean - 2.0) <= 3 * est.stderr + 0.5 / 128


def test_single_sample_warns():
    with pytest.warns(RuntimeWarning):
        est = estimate_trace_moment(gue(8), 2, samples=1, seed=0)
    assert est.stderr == 0.0 and est.degenerate


def test_stderr_definition():
    est = estimate_trace_moment(gue(16), 2, samples=5, seed=4)
    vals = [np.trace(sample_family([gue(16)], 4, k)[0] @ sample_family([gue(16)], 4, k)[0]).real / 16 for k in range(5)]
    assert est.mean == pytest.approx(np.mean(vals))
    assert est.stderr == pytest.approx(np.std(vals, ddof=1) / math.sqrt(5))


def test_memory_cap_and_arguments():
    with pytest.raises(SizeLimitError):
        estimate_qn_moment(quadratic_star(3), gue(64), 4, samples=2, seed=0, memory_cap=1000)
    with pytest.raises(ValueError):
        estimate_qn_moment(quadratic_star(3), [gue(8)] * 2, 4, samples=2, seed=0)
    with pytest.raises(ValueError):
        estimate_qn_moment(quadratic_star(3), gue(8), 0, samples=2, seed=0)
    zero = estimate_qn_moment(CoefficientTensor(3, 2, {}), gue(8), 2, samples=2, seed=0)
    assert zero.mean == 0.0
