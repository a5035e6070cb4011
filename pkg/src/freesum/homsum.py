"""
Coefficient tensors of multilinear homogeneous sums.

A tensor ``f`` on ``{1..N}^d`` defines the non-commutative polynomial

    Q(x_1, ..., x_N) = sum f(i_1, ..., i_d) x_{i_1} ... x_{i_d}

Indices are 1-based everywhere (storage, JSON, influences).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Mapping

import numpy as np

from .laws import Law
from .word_engine import DEFAULT_TUPLE_CAP, FreeEvaluator, NCPolynomial, DEFAULT_EVALUATOR

SYM_TOL = 1e-12

__all__ = [
    "CoefficientTensor",
    "InfluenceProfile",
    "Predicates",
    "qn_moment",
    "resolve_assignment",
    "constant_linear",
    "quadratic_star",
    "mirror_counterexample",
    "sliding_window",
    "random_mirror_symmetric",
    "random_fully_symmetric",
    "make_family",
    "FAMILIES",
]


@dataclass(frozen=True)
class Predicates:
    mirror_symmetric: bool
    fully_symmetric: bool
    vanishes_on_diagonals: bool
    norm_sq: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class InfluenceProfile:
    per_index: tuple[float, ...]  # entry i-1 holds the influence of index i
    tau: float


@dataclass(frozen=True, eq=False)
class CoefficientTensor:
    """
    Sparse real array on ``{1..N}^d``.

    ``entries`` maps 1-based index tuples to non-zero values; explicit zeros
    are dropped on construction.
    """

    N: int
    d: int
    entries: Mapping[tuple[int, ...], float]
    family: str | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.N < 1 or self.d < 1:
            raise ValueError(f"need N >= 1 and d >= 1, got N={self.N}, d={self.d}")
        clean = {}
        for idx, v in self.entries.items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != self.d:
                raise ValueError(f"index {idx} does not have length d={self.d}")
            if any(i < 1 or i > self.N for i in idx):
                raise ValueError(f"index {idx} out of range 1..{self.N}")
            if v != 0.0:
                clean[idx] = float(v)
        object.__setattr__(self, "entries", dict(sorted(clean.items())))

    # --- array views -------------------------------------------------

    @cached_property
    def idx(self) -> np.ndarray:
        return np.array(list(self.entries), dtype=np.int64).reshape(len(self.entries), self.d)

    @cached_property
    def val(self) -> np.ndarray:
        return np.array(list(self.entries.values()), dtype=float)

    def __getitem__(self, idx) -> float:
        return self.entries.get(tuple(idx), 0.0)

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        return (
            isinstance(other, CoefficientTensor)
            and (self.N, self.d) == (other.N, other.d)
            and self.entries == other.entries
        )

    @property
    def norm_sq(self) -> float:
        return math.fsum(v * v for v in self.entries.values())

    def dense(self) -> np.ndarray:
        out = np.zeros((self.N,) * self.d)
        for idx, v in self.entries.items():
            out[tuple(i - 1 for i in idx)] = v
        return out

    def scaled(self, c: float) -> "CoefficientTensor":
        return CoefficientTensor(self.N, self.d, {k: c * v for k, v in self.entries.items()}, self.family, self.params)

    def normalized(self) -> "CoefficientTensor":
        """Rescale so that the squared coefficients sum to 1."""
        ns = self.norm_sq
        if ns == 0:
            raise ValueError("cannot normalize the zero tensor")
        return self.scaled(1.0 / math.sqrt(ns))

    def to_polynomial(self) -> NCPolynomial:
        return NCPolynomial(self.entries)

    # --- predicates and influences -------------------------------------

    def predicates(self) -> Predicates:
        e = self.entries
        scale = max((abs(v) for v in e.values()), default=0.0)
        tol = SYM_TOL * max(scale, 1.0)

        def close(a, b):
            return abs(a - b) <= tol

        mirror = all(close(v, e.get(k[::-1], 0.0)) for k, v in e.items())
        full = all(
            close(v, e.get(p, 0.0)) for k, v in e.items() for p in set(itertools.permutations(k))
        )
        diag = all(len(set(k)) == len(k) for k in e)
        return Predicates(mirror, full, diag, self.norm_sq)

    def _check_index(self, i: int):
        if not 1 <= i <= self.N:
            raise ValueError(f"index {i} out of range 1..{self.N}")

    def influence_free(self, i: int) -> float:
        """Squared mass of entries carrying ``i``, counted once per slot holding ``i``."""
        self._check_index(i)
        return math.fsum(v * v * k.count(i) for k, v in self.entries.items())

    def influence_classical(self, i: int) -> float:
        """Squared mass of entries whose first slot is ``i``."""
        self._check_index(i)
        return math.fsum(v * v for k, v in self.entries.items() if k[0] == i)

    def influence_profile(self, kind: str = "free") -> InfluenceProfile:
        sq = self.val**2
        per = np.zeros(self.N + 1)
        if len(sq):
            slots = range(self.d) if kind == "free" else range(1) if kind == "classical" else None
            if slots is None:
                raise ValueError(f"unknown influence kind {kind!r}")
            for l in slots:
                per += np.bincount(self.idx[:, l], weights=sq, minlength=self.N + 1)
        per = tuple(float(x) for x in per[1:])
        return InfluenceProfile(per, max(per))

    @property
    def tau(self) -> float:
        """Largest free influence."""
        return self.influence_profile("free").tau

    # --- serialization --------------------------------------------------

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "N": self.N,
            "d": self.d,
            "entries": [{"idx": list(k), "val": v} for k, v in self.entries.items()],
        }
        if self.family:
            out["family"] = self.family
            out["params"] = dict(self.params)
        return out

    @classmethod
    def from_json(cls, obj: dict | str) -> "CoefficientTensor":
        """
        Parse either an explicit tensor ``{"N", "d", "entries"}`` or a family
        reference ``{"family": name, "params": {...}}``.
        """
        if isinstance(obj, str):
            obj = json.loads(obj)
        if "entries" not in obj:
            if "family" not in obj:
                raise ValueError("tensor JSON needs 'entries' or 'family'")
            return make_family(obj["family"], **(obj.get("params") or {}))
        entries: dict = {}
        for item in obj["entries"]:
            key = tuple(int(i) for i in item["idx"])
            if key in entries:
                raise ValueError(f"duplicate idx {list(key)}")
            entries[key] = float(item["val"])
        return cls(int(obj["N"]), int(obj["d"]), entries, obj.get("family"), dict(obj.get("params") or {}))


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------


def resolve_assignment(laws, N: int) -> dict[int, Law]:
    """
    Normalize a law assignment to ``{i: Law}`` over ``1..N``.

    Accepts a single :class:`Law` (same law everywhere), a sequence of ``N``
    laws (position ``i-1`` for index ``i``), a mapping, or a callable ``i -> Law``.
    """
    if isinstance(laws, Law):
        return {i: laws for i in range(1, N + 1)}
    if isinstance(laws, Mapping):
        missing = [i for i in range(1, N + 1) if i not in laws]
        if missing:
            raise ValueError(f"no law for indices {missing}")
        return {i: laws[i] for i in range(1, N + 1)}
    if callable(laws):
        return {i: laws(i) for i in range(1, N + 1)}
    laws = list(laws)
    if len(laws) != N:
        raise ValueError(f"expected {N} laws, got {len(laws)}")
    return {i: laws[i - 1] for i in range(1, N + 1)}


def qn_moment(
    f: CoefficientTensor,
    laws,
    m: int,
    cap: int = DEFAULT_TUPLE_CAP,
    evaluator: FreeEvaluator | None = None,
) -> float:
    """
    ``phi(Q(X_1, ..., X_N)^m)`` for freely independent ``X_i`` with the given laws.

    The m-fold product is expanded over the sparse support of ``f`` only
    (``|supp f|^m`` tuples), and each tuple is reduced to its kernel pattern
    before evaluation.

    Raises
    ------
    SizeLimitError
        If ``|supp f|^m`` exceeds ``cap``.
    """
    assignment = resolve_assignment(laws, f.N)
    return (evaluator or DEFAULT_EVALUATOR).polynomial_moment(f.to_polynomial(), assignment, m, cap=cap)


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------


def constant_linear(N: int) -> CoefficientTensor:
    """``f(i) = 1/sqrt(N)``: the normalized sum of the free CLT."""
    if N < 1:
        raise ValueError("constant_linear needs N >= 1")
    c = 1.0 / math.sqrt(N)
    return CoefficientTensor(N, 1, {(i,): c for i in range(1, N + 1)}, "constant_linear", {"N": N})


def quadratic_star(N: int) -> CoefficientTensor:
    """``(1/sqrt(2N-2)) * sum_{i=2..N} (x_1 x_i + x_i x_1)``."""
    if N < 2:
        raise ValueError("quadratic_star needs N >= 2")
    c = 1.0 / math.sqrt(2 * N - 2)
    entries = {}
    for i in range(2, N + 1):
        entries[(1, i)] = c
        entries[(i, 1)] = c
    return CoefficientTensor(N, 2, entries, "quadratic_star", {"N": N})


def _neighbour_kernel(M: int) -> dict[tuple[int, int], float]:
    # f'_M(a, a+1) = f'_M(a+1, a) = 1/sqrt(2M-2), zero elsewhere
    c = 1.0 / math.sqrt(2 * M - 2)
    out = {}
    for a in range(1, M):
        out[(a, a + 1)] = c
        out[(a + 1, a)] = c
    return out


def mirror_counterexample(N: int) -> CoefficientTensor:
    """
    Degree-3 tensor ``f(i, 1, k) = f'_{N-1}(i-1, k-1)`` for ``i, k >= 2``, zero
    otherwise, where ``f'_M`` couples nearest neighbours on ``{1..M}``.

    Mirror-symmetric, zero on diagonals, normalized, but not fully symmetric;
    index 1 carries influence 1 for every N.
    """
    if N < 4:
        raise ValueError("mirror_counterexample needs N >= 4")
    inner = _neighbour_kernel(N - 1)
    entries = {(a + 1, 1, b + 1): v for (a, b), v in inner.items()}
    return CoefficientTensor(N, 3, entries, "mirror_counterexample", {"N": N})


def sliding_window(N: int, k: int) -> CoefficientTensor:
    """
    ``(1/sqrt(N)) * sum_{i=1..N-k} (x_i x_{i+1} ... x_{i+k} + x_{i+k} ... x_i)``.

    The squared coefficients sum to ``2(N-k)/N``, not 1; call
    :meth:`CoefficientTensor.normalized` for a unit-norm version.
    """
    if k < 1:
        raise ValueError("sliding_window needs k >= 1")
    if N <= k:
        raise ValueError(f"sliding_window needs N > k, got N={N}, k={k}")
    c = 1.0 / math.sqrt(N)
    entries: dict = {}
    for i in range(1, N - k + 1):
        w = tuple(range(i, i + k + 1))
        entries[w] = entries.get(w, 0.0) + c
        entries[w[::-1]] = entries.get(w[::-1], 0.0) + c
    return CoefficientTensor(N, k + 1, entries, "sliding_window", {"N": N, "k": k})


def _random_offdiag_index(rng: np.random.Generator, N: int, d: int) -> tuple[int, ...]:
    return tuple(int(x) + 1 for x in rng.choice(N, size=d, replace=False))


def random_mirror_symmetric(
    N: int, d: int, n_terms: int, rng: np.random.Generator, normalize: bool = True
) -> CoefficientTensor:
    """Random sparse mirror-symmetric tensor vanishing on diagonals."""
    if d > N:
        raise ValueError("need d <= N for a tensor vanishing on diagonals")
    entries: dict = {}
    for _ in range(n_terms):
        k = _random_offdiag_index(rng, N, d)
        v = float(rng.normal())
        entries[k] = v
        entries[k[::-1]] = v
    f = CoefficientTensor(N, d, entries, "random_mirror_symmetric", {"N": N, "d": d, "n_terms": n_terms})
    return f.normalized() if normalize and f.entries else f


def random_fully_symmetric(
    N: int, d: int, rng: np.random.Generator, n_orbits: int | None = None, normalize: bool = True
) -> CoefficientTensor:
    """
    Random fully symmetric tensor vanishing on diagonals.

    With ``n_orbits=None`` every ``d``-subset of ``{1..N}`` gets a weight drawn
    from ``U(0.5, 1.5)`` (spread-out mass, so the influences shrink as N grows);
    otherwise ``n_orbits`` random subsets get normal weights.
    """
    if d > N:
        raise ValueError("need d <= N for a tensor vanishing on diagonals")
    if n_orbits is None:
        subsets = list(itertools.combinations(range(1, N + 1), d))
        weights = rng.uniform(0.5, 1.5, size=len(subsets))
    else:
        subsets = [tuple(sorted(_random_offdiag_index(rng, N, d))) for _ in range(n_orbits)]
        weights = rng.normal(size=len(subsets))
    entries = {}
    for s, w in zip(subsets, weights):
        for p in itertools.permutations(s):
            entries[p] = float(w)
    f = CoefficientTensor(N, d, entries, "random_fully_symmetric", {"N": N, "d": d})
    return f.normalized() if normalize and f.entries else f


FAMILIES: dict[str, Callable[..., CoefficientTensor]] = {
    "constant_linear": constant_linear,
    "quadratic_star": quadratic_star,
    "mirror_counterexample": mirror_counterexample,
    "sliding_window": sliding_window,
}


def make_family(name: str, **params) -> CoefficientTensor:
    """Build a named family; ``normalize=True`` rescales to unit norm."""
    normalize = bool(params.pop("normalize", False))
    try:
        ctor = FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown family {name!r}; known: {sorted(FAMILIES)}") from None
    f = ctor(**params)
    return f.normalized() if normalize else f
