"""
Block graphs over segmented point sets, graph contractions, and the
hypercontractivity bound for homogeneous sums.

A *graph* on ``{1..n_1+...+n_r}`` is a set of disjoint blocks (not necessarily
covering).  It *respects* the shape ``(n_1, ..., n_r)`` when every block has at
most one point in each segment; it is *complete* when the blocks cover
everything.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Hashable, Mapping, Sequence

import numpy as np

from .errors import SizeLimitError
from .homsum import CoefficientTensor, qn_moment, resolve_assignment
from .laws import Law
from .wigner_calc import DiscreteKernel, kernel_array
from .word_engine import FreeEvaluator, DEFAULT_EVALUATOR

GRAPH_CAP = 12

__all__ = [
    "BlockGraph",
    "enumerate_graphs",
    "contract_graph",
    "hyper_constant",
    "hypercontractivity_check",
    "word_bound_check",
    "HyperCheck",
    "WordBound",
]


def _segments(shape: Sequence[int]) -> list[int]:
    # segment number of each point, 1-based points -> index p-1
    seg = []
    for s, size in enumerate(shape):
        seg.extend([s] * size)
    return seg


@dataclass(frozen=True)
class BlockGraph:
    shape: tuple[int, ...]
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "shape", tuple(int(x) for x in self.shape))
        blocks = tuple(sorted(tuple(sorted(b)) for b in self.blocks))
        object.__setattr__(self, "blocks", blocks)
        pts = [p for b in blocks for p in b]
        if len(pts) != len(set(pts)):
            raise ValueError("blocks are not disjoint")
        if any(p < 1 or p > self.size for p in pts):
            raise ValueError("block point out of range")
        if any(len(b) == 0 for b in blocks):
            raise ValueError("empty block")

    @property
    def size(self) -> int:
        return sum(self.shape)

    @property
    def vertices(self) -> set[int]:
        return {p for b in self.blocks for p in b}

    @property
    def respects(self) -> bool:
        seg = _segments(self.shape)
        return all(len({seg[p - 1] for p in b}) == len(b) for b in self.blocks)

    @property
    def no_singleton(self) -> bool:
        return all(len(b) >= 2 for b in self.blocks)

    @property
    def complete(self) -> bool:
        return len(self.vertices) == self.size


def enumerate_graphs(shape: Sequence[int], complete: bool, cap: int = GRAPH_CAP) -> list[BlockGraph]:
    """
    All graphs respecting ``shape`` with no singleton block, sorted canonically.

    With ``complete=True`` only covering graphs are returned.
    """
    shape = tuple(int(x) for x in shape)
    if any(x < 1 for x in shape):
        raise ValueError("shape entries must be positive")
    n = sum(shape)
    if n > cap:
        raise SizeLimitError(f"graph enumeration on {n} points exceeds cap {cap}")
    seg = _segments(shape)
    out: list[BlockGraph] = []
    blocks: list[list[int]] = []
    used: list[set[int]] = []  # segments already present in each block

    def rec(p: int):
        if p > n:
            if all(len(b) >= 2 for b in blocks):
                out.append(BlockGraph(shape, tuple(tuple(b) for b in blocks)))
            return
        s = seg[p - 1]
        if not complete:
            rec(p + 1)
        for b, u in zip(blocks, used):
            if s not in u:
                b.append(p)
                u.add(s)
                rec(p + 1)
                b.pop()
                u.discard(s)
        # a new block needs a later point outside this segment, or it stays a singleton
        if any(seg[q - 1] != s for q in range(p + 1, n + 1)):
            blocks.append([p])
            used.append({s})
            rec(p + 1)
            blocks.pop()
            used.pop()

    rec(1)
    out.sort(key=lambda g: g.blocks)
    return out


def contract_graph(gamma: BlockGraph, factors: Sequence[DiscreteKernel]) -> DiscreteKernel:
    """
    ``C_gamma(f_1 x ... x f_r)``: indices in one block are set equal and summed,
    the remaining positions become the output indices, in their original order.
    """
    if len(factors) != len(gamma.shape) or any(f.q != n for f, n in zip(factors, gamma.shape)):
        raise ValueError(f"factor degrees {[f.q for f in factors]} do not match shape {gamma.shape}")
    Ns = {f.N for f in factors}
    if len(Ns) != 1:
        raise ValueError("factors must share N")
    N = Ns.pop()
    owner = {p: k for k, b in enumerate(gamma.blocks) for p in b}
    nb = len(gamma.blocks)
    labels = []
    free = []
    for p in range(1, gamma.size + 1):
        if p in owner:
            labels.append(owner[p])
        else:
            labels.append(nb + len(free))
            free.append(nb + len(free))
    operands = []
    pos = 0
    for f in factors:
        operands.append(kernel_array(f))
        operands.append(labels[pos : pos + f.q])
        pos += f.q
    arr = np.einsum(*operands, free) if operands else np.ones(())
    if arr.ndim == 0:
        entries = {(): float(arr)}
    else:
        entries = {tuple(int(i) + 1 for i in ix): float(arr[ix]) for ix in zip(*np.nonzero(arr))}
    return DiscreteKernel(N, len(free), entries)


@lru_cache(maxsize=None)
def hyper_constant(r: int, d: int, cap: int = GRAPH_CAP) -> int:
    """Number of complete, singleton-free graphs respecting ``d x ... x d`` (2r copies)."""
    if r < 1 or d < 1:
        raise ValueError("r and d must be positive")
    return len(enumerate_graphs((d,) * (2 * r), complete=True, cap=cap))


@dataclass(frozen=True)
class HyperCheck:
    moment: float
    constant: int
    mu: float
    norm_sq: float
    bound: float
    ratio: float
    holds: bool


def hypercontractivity_check(
    f: CoefficientTensor,
    laws,
    r: int,
    evaluator: FreeEvaluator | None = None,
    tol: float = 1e-12,
) -> HyperCheck:
    """
    Compare ``phi(Q^{2r})`` with ``C_{r,d} * mu_{2^{rd-1}} * (sum f^2)^r``,
    where ``mu_k`` is the largest even moment ``phi(X_i^{2l})``, ``l <= k``,
    over all ``N`` variables.

    Requires moments up to order ``2^{rd}`` in every law.

    Raises
    ------
    ValueError
        If ``f`` is not mirror-symmetric or does not vanish on diagonals.
    CapacityError
        If a law stores fewer than ``2^{rd}`` moments.
    """
    pred = f.predicates()
    if not (pred.mirror_symmetric and pred.vanishes_on_diagonals):
        raise ValueError("hypercontractivity_check needs a mirror-symmetric tensor vanishing on diagonals")
    assignment = resolve_assignment(laws, f.N)
    k = 2 ** (r * f.d - 1)
    mu = max(law.even_moment_sup(k) for law in set(assignment.values()))
    C = hyper_constant(r, f.d)
    lhs = qn_moment(f, assignment, 2 * r, evaluator=evaluator)
    bound = C * mu * pred.norm_sq**r
    if bound == 0.0:
        ratio = 0.0 if abs(lhs) <= tol else float("inf")
    else:
        ratio = lhs / bound
    return HyperCheck(lhs, C, mu, pred.norm_sq, bound, ratio, lhs <= bound + tol * max(1.0, bound))


@dataclass(frozen=True)
class WordBound:
    value: float
    mu: float
    holds: bool


def word_bound_check(
    word: Sequence[Hashable],
    assignment: Mapping[Hashable, Law],
    evaluator: FreeEvaluator | None = None,
    tol: float = 1e-12,
) -> WordBound:
    """
    ``|phi(X_{w_1} ... X_{w_{2r}})| <= mu_{2^{r-1}}``, with the supremum of
    even moments taken over the variables occurring in the word.
    """
    if len(word) == 0 or len(word) % 2:
        raise ValueError("word_bound_check needs a non-empty word of even length")
    r = len(word) // 2
    value = (evaluator or DEFAULT_EVALUATOR).word_moment(word, assignment)
    mu = max(assignment[x].even_moment_sup(2 ** (r - 1)) for x in set(word))
    return WordBound(value, mu, abs(value) <= mu + tol * max(1.0, mu))
