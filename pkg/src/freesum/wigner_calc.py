"""
Wigner chaos over the orthonormal indicator basis ``e_i = 1_[i-1, i]``.

A kernel of degree q is a sparse map from q-tuples in ``{1..N}^q`` to reals,
standing for ``sum g(i_1..i_q) e_{i_1} x ... x e_{i_q}``; all L^2 inner
products reduce to finite sums over these coordinates.  A chaos element is a
finite sum ``sum_q I_q(g_q)``.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .errors import SizeLimitError
from .homsum import CoefficientTensor

ENTRY_CAP = 10_000_000

__all__ = [
    "DiscreteKernel",
    "ChaosElement",
    "embed",
    "adjoint",
    "contract",
    "multiply",
    "chaos_moment",
    "fourth_moment_report",
    "FourthMomentReport",
]


@dataclass(frozen=True, eq=False)
class DiscreteKernel:
    N: int
    q: int
    entries: Mapping[tuple[int, ...], float]

    def __post_init__(self):
        clean = {}
        for k, v in self.entries.items():
            k = tuple(int(i) for i in k)
            if len(k) != self.q:
                raise ValueError(f"index {k} does not have degree {self.q}")
            if any(i < 1 or i > self.N for i in k):
                raise ValueError(f"index {k} out of range 1..{self.N}")
            if v != 0.0:
                clean[k] = float(v)
        object.__setattr__(self, "entries", clean)

    @classmethod
    def scalar(cls, N: int, c: float) -> "DiscreteKernel":
        return cls(N, 0, {(): c})

    @property
    def value(self) -> float:
        """The scalar held by a degree-0 kernel."""
        if self.q != 0:
            raise ValueError("value is only defined for degree 0")
        return self.entries.get((), 0.0)

    @property
    def norm_sq(self) -> float:
        return math.fsum(v * v for v in self.entries.values())

    @property
    def norm(self) -> float:
        return math.sqrt(self.norm_sq)

    def inner(self, other: "DiscreteKernel") -> float:
        if (self.N, self.q) != (other.N, other.q):
            raise ValueError("inner product needs equal N and degree")
        small, big = sorted((self.entries, other.entries), key=len)
        return math.fsum(v * big.get(k, 0.0) for k, v in small.items())

    def __eq__(self, other):
        return isinstance(other, DiscreteKernel) and (self.N, self.q, self.entries) == (
            other.N,
            other.q,
            other.entries,
        )

    def allclose(self, other: "DiscreteKernel", tol: float = 1e-12) -> bool:
        if (self.N, self.q) != (other.N, other.q):
            return False
        keys = set(self.entries) | set(other.entries)
        return all(abs(self.entries.get(k, 0.0) - other.entries.get(k, 0.0)) <= tol for k in keys)

    def to_json(self) -> dict[str, Any]:
        return {"N": self.N, "q": self.q, "entries": [{"idx": list(k), "val": v} for k, v in self.entries.items()]}

    @classmethod
    def from_json(cls, obj: dict) -> "DiscreteKernel":
        entries: dict = {}
        for item in obj["entries"]:
            key = tuple(int(i) for i in item["idx"])
            if key in entries:
                raise ValueError(f"duplicate idx {list(key)}")
            entries[key] = float(item["val"])
        return cls(int(obj["N"]), int(obj["q"]), entries)


def embed(f: CoefficientTensor) -> DiscreteKernel:
    """Coordinates of ``g = sum f(i) e_{i_1} x ... x e_{i_d}``: the same sparse data."""
    return DiscreteKernel(f.N, f.d, f.entries)


def adjoint(g: DiscreteKernel) -> DiscreteKernel:
    """Index-reversed kernel ``g*(t_1..t_q) = g(t_q..t_1)``."""
    return DiscreteKernel(g.N, g.q, {k[::-1]: v for k, v in g.entries.items()})


def contract(g: DiscreteKernel, h: DiscreteKernel, r: int, cap: int = ENTRY_CAP) -> DiscreteKernel:
    """
    r-th contraction: the last r indices of ``g`` are summed against the
    first r indices of ``h`` taken in reverse order,

        (g *_r h)(s, t) = sum_x g(s, x_1..x_r) h(x_r..x_1, t).

    ``r = 0`` is the tensor product and ``p = q = r`` gives ``<g, h*>``.
    """
    if g.N != h.N:
        raise ValueError(f"N mismatch: {g.N} != {h.N}")
    if not 0 <= r <= min(g.q, h.q):
        raise ValueError(f"contraction order r={r} outside 0..{min(g.q, h.q)}")
    p = g.q
    by_head: dict[tuple, list] = defaultdict(list)
    for k, v in h.entries.items():
        by_head[k[:r]].append((k[r:], v))
    bound = sum(len(by_head.get(k[p - r :][::-1], ())) for k in g.entries)
    if bound > cap:
        raise SizeLimitError(f"contraction would touch {bound} entry pairs (cap {cap})")
    out: dict[tuple, float] = defaultdict(float)
    for k, v in g.entries.items():
        head = k[p - r :][::-1]
        lead = k[: p - r]
        for tail, w in by_head.get(head, ()):
            out[lead + tail] += v * w
    return DiscreteKernel(g.N, p + h.q - 2 * r, out)


@dataclass(frozen=True, eq=False)
class ChaosElement:
    """Finite sum ``sum_q I_q(kernels[q])`` over a common index range ``N``."""

    N: int
    kernels: Mapping[int, DiscreteKernel] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for q, g in self.kernels.items():
            if g.N != self.N or g.q != q:
                raise ValueError("kernel does not match the element's N or its degree slot")
            if g.entries:
                clean[q] = g
        object.__setattr__(self, "kernels", dict(sorted(clean.items())))

    @classmethod
    def of(cls, g: DiscreteKernel) -> "ChaosElement":
        return cls(g.N, {g.q: g})

    @classmethod
    def scalar(cls, N: int, c: float) -> "ChaosElement":
        return cls(N, {0: DiscreteKernel.scalar(N, c)})

    @property
    def expectation(self) -> float:
        """phi of the element: only the degree-0 part survives."""
        g = self.kernels.get(0)
        return g.value if g is not None else 0.0

    @property
    def size(self) -> int:
        return sum(len(g.entries) for g in self.kernels.values())

    def __add__(self, other: "ChaosElement") -> "ChaosElement":
        if self.N != other.N:
            raise ValueError("N mismatch")
        acc: dict[int, dict] = defaultdict(lambda: defaultdict(float))
        for el in (self, other):
            for q, g in el.kernels.items():
                for k, v in g.entries.items():
                    acc[q][k] += v
        return ChaosElement(self.N, {q: DiscreteKernel(self.N, q, e) for q, e in acc.items()})

    def __mul__(self, other: "ChaosElement") -> "ChaosElement":
        return multiply(self, other)


def multiply(a: ChaosElement, b: ChaosElement, cap: int = ENTRY_CAP) -> ChaosElement:
    """
    Product by the multiplication formula
    ``I_p(f) I_q(g) = sum_{r=0}^{min(p,q)} I_{p+q-2r}(f *_r g)``, extended bilinearly.
    """
    if a.N != b.N:
        raise ValueError(f"N mismatch: {a.N} != {b.N}")
    acc: dict[int, dict] = defaultdict(lambda: defaultdict(float))
    for p, f in a.kernels.items():
        for q, g in b.kernels.items():
            for r in range(min(p, q) + 1):
                h = contract(f, g, r, cap=cap)
                slot = acc[h.q]
                for k, v in h.entries.items():
                    slot[k] += v
                if len(slot) > cap:
                    raise SizeLimitError(f"product kernel of degree {h.q} exceeds {cap} entries")
    return ChaosElement(a.N, {q: DiscreteKernel(a.N, q, e) for q, e in acc.items()})


def chaos_moment(g: DiscreteKernel, m: int, cap: int = ENTRY_CAP) -> float:
    """
    ``phi(I_q(g)^m)``.

    Powers ``A = I(g)^ceil(m/2)`` and ``B = I(g)^floor(m/2)`` are built with
    :func:`multiply`; the last multiplication only needs its degree-0 term,
    ``sum_q <a_q, b_q*>``, so it is not expanded.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    x = ChaosElement.of(g)
    if m == 1:
        return x.expectation
    powers = {1: x}
    hi, lo = (m + 1) // 2, m // 2
    for k in range(2, hi + 1):
        powers[k] = multiply(powers[k - 1], x, cap=cap)
    A, B = powers[hi], powers[lo]
    total = []
    for q, a in A.kernels.items():
        b = B.kernels.get(q)
        if b is not None:
            # a *_q b = <a, b*>
            total.append(contract(a, b, q, cap=cap).value if q else a.value * b.value)
    return math.fsum(total)


@dataclass(frozen=True)
class FourthMomentReport:
    contraction_norms: dict[int, float]
    fourth_moment: float
    influence_lower_bound: float
    top_contraction_norm: float | None
    inequality_holds: bool
    slack: float

    def as_dict(self) -> dict:
        return {
            "contraction_norms": {str(r): v for r, v in self.contraction_norms.items()},
            "fourth_moment": self.fourth_moment,
            "influence_lower_bound": self.influence_lower_bound,
            "top_contraction_norm": self.top_contraction_norm,
            "inequality_holds": self.inequality_holds,
            "slack": self.slack,
        }


def fourth_moment_report(f: CoefficientTensor, tol: float = 1e-12, cap: int = ENTRY_CAP) -> FourthMomentReport:
    """
    Fourth-moment diagnostics of ``I_d(g)`` with ``g = embed(f)``.

    Reports ``||g *_r g||`` for ``r = 1..d-1``, ``phi(I_d(g)^4)``, the first-slot
    influence bound ``max_i sum_k f(i, k_2..k_d)^2``, and whether
    ``||g *_{d-1} g||`` dominates that bound (it must, for mirror-symmetric f).

    Raises
    ------
    ValueError
        If ``f`` is not mirror-symmetric or does not vanish on diagonals.
    """
    pred = f.predicates()
    if not (pred.mirror_symmetric and pred.vanishes_on_diagonals):
        raise ValueError("fourth_moment_report needs a mirror-symmetric tensor vanishing on diagonals")
    g = embed(f)
    norms = {r: contract(g, g, r, cap=cap).norm for r in range(1, f.d)}
    bound = f.influence_profile("classical").tau
    top = norms.get(f.d - 1)
    if top is None:
        holds, slack = True, 0.0
    else:
        slack = top - bound
        holds = slack >= -tol
    return FourthMomentReport(norms, chaos_moment(g, 4, cap=cap), bound, top, holds, slack)


def kernel_array(g: DiscreteKernel) -> np.ndarray:
    """Dense copy of a kernel (for small N and q)."""
    out = np.zeros((g.N,) * g.q)
    for k, v in g.entries.items():
        out[tuple(i - 1 for i in k)] = v
    return out
