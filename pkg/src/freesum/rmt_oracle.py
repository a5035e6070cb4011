"""
Random-matrix Monte Carlo for free moments.

Independent GUE matrices and independent Haar-conjugated deterministic
diagonals are asymptotically free, so normalized traces of polynomials in
them approximate the exact free moments up to an O(1/n) bias.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import SizeLimitError
from .homsum import CoefficientTensor
from .laws import Law

MEMORY_CAP_BYTES = 2 * 1024**3

__all__ = [
    "MatrixModel",
    "McEstimate",
    "gue",
    "conjugated_atomic",
    "model_for_law",
    "haar_unitary",
    "sample_family",
    "estimate_qn_moment",
    "estimate_trace_moment",
    "atom_counts",
]


def atom_counts(proportions: Sequence[float], n: int) -> list[int]:
    """Largest-remainder rounding of ``n * p`` so that the counts sum to ``n``."""
    raw = [n * p for p in proportions]
    counts = [math.floor(x) for x in raw]
    short = n - sum(counts)
    order = sorted(range(len(raw)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in order[:short]:
        counts[i] += 1
    return counts


@dataclass(frozen=True)
class MatrixModel:
    """
    ``kind="gue"``: ``sqrt(variance) * (A + A^H)/sqrt(2n)`` with standard complex Gaussian ``A``.
    ``kind="atomic"``: ``U D U^H`` with Haar ``U`` and ``D`` the diagonal of atom values,
    each repeated ``round(n * proportion)`` times.
    """

    kind: str
    n: int
    atoms: tuple[tuple[float, float], ...] | None = None
    variance: float = 1.0

    def __post_init__(self):
        if self.kind not in ("gue", "atomic"):
            raise ValueError(f"unknown matrix model kind {self.kind!r}")
        if self.kind == "atomic":
            if not self.atoms:
                raise ValueError("atomic model needs atoms")
            total = math.fsum(p for _, p in self.atoms)
            if abs(total - 1.0) > 1e-12:
                raise ValueError(f"atom proportions sum to {total}, not 1")

    @property
    def diagonal(self) -> np.ndarray:
        counts = atom_counts([p for _, p in self.atoms], self.n)
        return np.repeat([x for x, _ in self.atoms], counts)


def gue(n: int, variance: float = 1.0) -> MatrixModel:
    return MatrixModel("gue", n, variance=variance)


def conjugated_atomic(n: int, atoms: Sequence[tuple[float, float]]) -> MatrixModel:
    return MatrixModel("atomic", n, tuple((float(x), float(p)) for x, p in atoms))


def model_for_law(law: Law, n: int) -> MatrixModel:
    """Matrix model whose limiting spectral law is ``law`` (semicircular or atomic kinds)."""
    if law.kind == "semicircular":
        return gue(n, law.params.get("variance", 1.0))
    if law.kind == "rademacher":
        return conjugated_atomic(n, [(1.0, 0.5), (-1.0, 0.5)])
    if law.kind == "atoms":
        return conjugated_atomic(n, [tuple(a) for a in law.params["atoms"]])
    raise ValueError(f"no matrix model for a law of kind {law.kind!r}")


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / math.sqrt(2)


def haar_unitary(n: int, rng: np.random.Generator, cols: int | None = None) -> np.ndarray:
    """
    First ``cols`` columns (default all) of a Haar unitary: QR of a complex
    Ginibre matrix with the phases of ``diag(R)`` moved into ``Q``.
    """
    cols = n if cols is None else cols
    Q, R = np.linalg.qr(_ginibre(rng, n, cols))
    d = np.diagonal(R)
    return Q * (d / np.abs(d))


def _draw(model: MatrixModel, rng: np.random.Generator) -> np.ndarray:
    n = model.n
    if model.kind == "gue":
        A = _ginibre(rng, n, n)
        H = (A + A.conj().T) / math.sqrt(2 * n)
        return H * math.sqrt(model.variance) if model.variance != 1.0 else H
    values = [x for x, _ in model.atoms]
    counts = atom_counts([p for _, p in model.atoms], n)
    # U D U^H = base*I + V diag(D - base) V^H, with V spanning the non-base columns
    base_i = max(range(len(values)), key=lambda i: counts[i])
    base = values[base_i]
    shifts = np.concatenate([np.full(c, values[i] - base) for i, c in enumerate(counts) if i != base_i] or [[]])
    X = base * np.eye(n, dtype=complex)
    if len(shifts):
        V = haar_unitary(n, rng, cols=len(shifts))
        X = X + (V * shifts) @ V.conj().T
    return X


def sample_family(models: Sequence[MatrixModel], seed, draw: int = 0) -> list[np.ndarray]:
    """
    One independent draw of every model.

    The generator is seeded with ``(seed, draw)`` so draw ``k`` is reproducible
    on its own, whatever the worker layout.
    """
    ns = {m.n for m in models}
    if len(ns) > 1:
        raise ValueError(f"models have different dimensions: {sorted(ns)}")
    rng = np.random.default_rng([int(seed), int(draw)])
    return [_draw(m, rng) for m in models]


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    samples: int
    seed: int
    degenerate: bool = False  # True when stderr is not estimable (one sample)


def _estimate(values: np.ndarray, seed: int) -> McEstimate:
    k = len(values)
    if k < 2:
        warnings.warn("a single Monte Carlo sample: stderr reported as 0", RuntimeWarning, stacklevel=3)
        return McEstimate(float(values.mean()), 0.0, k, seed, True)
    return McEstimate(float(values.mean()), float(values.std(ddof=1) / math.sqrt(k)), k, seed)


def _evaluate(terms: list[tuple[tuple[int, ...], float]], mats: dict[int, np.ndarray]) -> np.ndarray:
    """
    Matrix value of ``sum c * X_{k_1} ... X_{k_d}``.

    Greedy factorization: the variable occurring most often in the first (or
    last) slot is pulled out, ``X_a @ R`` (or ``L @ X_a``), and the rest is
    handled recursively.  ``x_1 T + T x_1`` costs two products this way.
    """
    if len(terms[0][0]) == 1:
        return sum(c * mats[k[0]] for k, c in terms)
    out = None
    while terms:
        heads: dict[int, int] = {}
        tails: dict[int, int] = {}
        for k, _ in terms:
            heads[k[0]] = heads.get(k[0], 0) + 1
            tails[k[-1]] = tails.get(k[-1], 0) + 1
        a = max(heads, key=lambda x: (heads[x], -x))
        b = max(tails, key=lambda x: (tails[x], -x))
        if heads[a] >= tails[b]:
            picked = [(k[1:], c) for k, c in terms if k[0] == a]
            rest = [(k, c) for k, c in terms if k[0] != a]
            part = mats[a] @ _evaluate(picked, mats)
        else:
            picked = [(k[:-1], c) for k, c in terms if k[-1] == b]
            rest = [(k, c) for k, c in terms if k[-1] != b]
            part = _evaluate(picked, mats) @ mats[b]
        out = part if out is None else out + part
        terms = rest
    return out


def _trace_powers(Q: np.ndarray, orders: Sequence[int]) -> list[float]:
    # tr(Q^m)/n for every requested m, sharing the matrix powers
    n = Q.shape[0]
    top = max(orders)
    powers = {1: Q}
    for k in range(2, (top + 1) // 2 + 1):
        powers[k] = powers[k - 1] @ Q
    out = []
    for m in orders:
        if m == 1:
            out.append(float(np.trace(Q).real) / n)
            continue
        a, b = (m + 1) // 2, m // 2
        # tr(A B) = sum_ij A_ij B_ji
        out.append(float(np.sum(powers[a] * powers[b].T).real) / n)
    return out


def estimate_qn_moment(
    f: CoefficientTensor,
    models: Sequence[MatrixModel] | MatrixModel,
    m: int | Sequence[int],
    samples: int,
    seed: int,
    threads: int = 1,
    memory_cap: int = MEMORY_CAP_BYTES,
) -> McEstimate | list[McEstimate]:
    """
    Monte Carlo mean of ``tr(Q(X_1..X_N)^m)/n`` over independent draws.

    ``models`` is one model per index ``1..N`` (or a single model reused for
    every index, each index still drawn independently).  If ``m`` is a list,
    one estimate per order is returned, all computed from the same draws.
    """
    orders = [m] if isinstance(m, int) else list(m)
    if any(k < 1 for k in orders):
        raise ValueError("moment orders must be >= 1")
    if isinstance(models, MatrixModel):
        models = [models] * f.N
    models = list(models)
    if len(models) != f.N:
        raise ValueError(f"need {f.N} matrix models, got {len(models)}")
    if not f.entries:
        zero = [McEstimate(0.0, 0.0, samples, seed, samples < 2) for _ in orders]
        return zero[0] if isinstance(m, int) else zero
    used = sorted({i for k in f.entries for i in k})
    n = models[0].n
    need = (len(used) + max(orders) // 2 + 4) * 16 * n * n * max(threads, 1)
    if need > memory_cap:
        raise SizeLimitError(f"Monte Carlo needs about {need} bytes (cap {memory_cap})")
    terms = list(f.entries.items())
    sub_models = [models[i - 1] for i in used]

    def one(draw: int) -> list[float]:
        mats = dict(zip(used, sample_family(sub_models, seed, draw)))
        return _trace_powers(_evaluate(terms, mats), orders)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            values = list(pool.map(one, range(samples)))
    else:
        values = [one(k) for k in range(samples)]
    arr = np.asarray(values).reshape(samples, len(orders))
    ests = [_estimate(arr[:, j], seed) for j in range(len(orders))]
    return ests[0] if isinstance(m, int) else ests


def estimate_trace_moment(
    model: MatrixModel, k: int | Sequence[int], samples: int, seed: int, threads: int = 1
) -> McEstimate | list[McEstimate]:
    """Monte Carlo mean of ``tr(X^k)/n`` for a single matrix model."""
    single = CoefficientTensor(1, 1, {(1,): 1.0})
    return estimate_qn_moment(single, [model], k, samples, seed, threads=threads)
