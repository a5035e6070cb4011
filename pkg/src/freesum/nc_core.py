"""
Set partitions, non-crossing partitions and the free moment-cumulant transforms.

Positions are 1-based throughout, matching the usual ``{1, ..., n}`` ground set.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Hashable, Sequence

import numpy as np

from .errors import SizeLimitError

NC_CAP = 14
PAIRING_CAP = 16

__all__ = [
    "SetPartition",
    "enumerate_nc",
    "enumerate_nc_pairings",
    "kernel_of",
    "is_refinement",
    "is_noncrossing",
    "moments_to_free_cumulants",
    "free_cumulants_to_moments",
    "catalan",
]


def catalan(k: int) -> int:
    """Return the k-th Catalan number ``binom(2k, k) / (k + 1)``."""
    c = 1
    for j in range(k):
        c = c * 2 * (2 * j + 1) // (j + 2)
    return c


@dataclass(frozen=True)
class SetPartition:
    """
    A partition of ``{1, ..., n}`` stored in canonical form.

    Blocks are sorted tuples and the block list is sorted by least element,
    so two partitions are equal iff they are the same set partition.
    """

    n: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(sorted(tuple(sorted(b)) for b in self.blocks))
        object.__setattr__(self, "blocks", blocks)
        seen = [p for b in blocks for p in b]
        if any(len(b) == 0 for b in blocks):
            raise ValueError("empty block")
        if sorted(seen) != list(range(1, self.n + 1)):
            raise ValueError(f"blocks do not partition {{1..{self.n}}}: {blocks}")

    @classmethod
    def from_blocks(cls, blocks) -> "SetPartition":
        blocks = [tuple(b) for b in blocks]
        n = sum(len(b) for b in blocks)
        return cls(n, tuple(blocks))

    def block_of(self) -> list[int]:
        """Map position (1-based) to block index; entry 0 is unused."""
        out = [0] * (self.n + 1)
        for k, b in enumerate(self.blocks):
            for p in b:
                out[p] = k
        return out

    @property
    def is_noncrossing(self) -> bool:
        return is_noncrossing(self)

    def __len__(self):
        return len(self.blocks)

    def __repr__(self):
        inner = ",".join("{" + ",".join(map(str, b)) + "}" for b in self.blocks)
        return f"SetPartition({{{inner}}})"


def is_noncrossing(pi: SetPartition) -> bool:
    """True iff no a < b < c < d with a, c in one block and b, d in another."""
    owner = pi.block_of()
    for block in pi.blocks:
        # another block crosses this one iff it has a point strictly between two
        # consecutive points of this block and a point outside that gap
        for a, c in zip(block, block[1:]):
            for j in {owner[p] for p in range(a + 1, c)}:
                if any(p < a or p > c for p in pi.blocks[j]):
                    return False
    return True


@lru_cache(maxsize=None)
def _nc_interval(lo: int, hi: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    if lo > hi:
        return ((),)
    out = []
    rest = list(range(lo + 1, hi + 1))
    # choose the other members of lo's block; gaps between them are independent
    n_rest = len(rest)
    for mask in range(1 << n_rest):
        members = [lo] + [rest[t] for t in range(n_rest) if mask >> t & 1]
        bounds = members + [hi + 1]
        pieces = [_nc_interval(a + 1, b - 1) for a, b in zip(bounds, bounds[1:])]
        partial = [(tuple(members),)]
        for piece in pieces:
            partial = [acc + q for acc in partial for q in piece]
        out.extend(partial)
    return tuple(out)


def enumerate_nc(n: int, cap: int = NC_CAP) -> list[SetPartition]:
    """
    All non-crossing partitions of ``{1, ..., n}``.

    Uses first-block recursion: the block containing 1 splits the remaining
    points into intervals that are partitioned independently.

    Raises
    ------
    SizeLimitError
        If ``n`` exceeds ``cap``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if n > cap:
        raise SizeLimitError(f"enumerate_nc: n={n} exceeds cap {cap} (Catalan({n}) = {catalan(n)})")
    return [SetPartition(n, blocks) for blocks in _nc_interval(1, n)]


@lru_cache(maxsize=None)
def _pairings(lo: int, hi: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    if lo > hi:
        return ((),)
    if (hi - lo + 1) % 2:
        return ()
    out = []
    # partner of lo must leave an even-sized interior
    for partner in range(lo + 1, hi + 1, 2):
        for inner in _pairings(lo + 1, partner - 1):
            for outer in _pairings(partner + 1, hi):
                out.append(((lo, partner),) + inner + outer)
    return tuple(out)


def enumerate_nc_pairings(n: int, cap: int = PAIRING_CAP) -> list[SetPartition]:
    """All non-crossing pair partitions of ``{1, ..., n}`` (empty for odd n)."""
    if n < 1:
        raise ValueError("n must be positive")
    if n > cap:
        raise SizeLimitError(f"enumerate_nc_pairings: n={n} exceeds cap {cap}")
    return [SetPartition(n, p) for p in _pairings(1, n)]


def kernel_of(word: Sequence[Hashable]) -> SetPartition:
    """Partition of positions of ``word`` into classes of equal letters."""
    if len(word) == 0:
        raise ValueError("kernel_of needs a non-empty word")
    classes: dict = {}
    for pos, letter in enumerate(word, start=1):
        classes.setdefault(letter, []).append(pos)
    return SetPartition(len(word), tuple(tuple(b) for b in classes.values()))


def is_refinement(pi: SetPartition, sigma: SetPartition) -> bool:
    """True iff every block of ``pi`` lies inside a block of ``sigma``."""
    if pi.n != sigma.n:
        raise ValueError(f"ground sets differ: {pi.n} != {sigma.n}")
    owner = sigma.block_of()
    return all(len({owner[p] for p in b}) == 1 for b in pi.blocks)


class _PowerTable:
    """Coefficients ``[z^t] M(z)^s`` of the moment series ``M = 1 + sum m_k z^k``.

    Entry ``(s, t)`` only involves ``m_1..m_t``, so the table can be filled
    while the moments are still being discovered.
    """

    def __init__(self, size: int):
        self.m = np.zeros(size + 1)
        self.m[0] = 1.0
        # rows[s][t] = [z^t] M^s; row 0 is the constant 1
        self.rows = [np.zeros(size + 1) for _ in range(size + 1)]
        self.rows[0][0] = 1.0
        self.filled = [0] * (size + 1)  # rows[s][:filled[s]] are valid
        self.filled[0] = size + 1

    def coef(self, s: int, t: int) -> float:
        row = self.rows[s]
        while self.filled[s] <= t:
            u = self.filled[s]
            prev = self.rows[s - 1]
            if self.filled[s - 1] <= u:
                self.coef(s - 1, u)
            row[u] = float(np.dot(self.m[: u + 1], prev[u::-1]))
            self.filled[s] = u + 1
        return row[t]


def free_cumulants_to_moments(kappa: Sequence[float]) -> list[float]:
    """
    Moments ``m_1..m_K`` from free cumulants ``kappa_1..kappa_K``.

    Grouping the non-crossing partitions of ``{1..n}`` by the size ``s`` of the
    block containing 1 gives ``m_n = sum_s kappa_s [z^(n-s)] M(z)^s``, where
    each interval between consecutive points of that block contributes one
    factor of the moment series ``M``.
    """
    K = len(kappa)
    table = _PowerTable(K)
    for n in range(1, K + 1):
        total = 0.0
        for s in range(1, n + 1):
            k = kappa[s - 1]
            if k != 0.0:
                total += k * float(table.coef(s, n - s))
        table.m[n] = total
    return [float(x) for x in table.m[1:]]


def moments_to_free_cumulants(moments: Sequence[float]) -> list[float]:
    """
    Free cumulants ``kappa_1..kappa_K`` from moments ``m_1..m_K``.

    Inverse of :func:`free_cumulants_to_moments`: in the first-block sum for
    ``m_n`` the ``s = n`` term is ``kappa_n`` and all others involve lower
    cumulants only.
    """
    K = len(moments)
    table = _PowerTable(K)
    table.m[1:] = np.asarray(moments, dtype=float)
    kappa = [0.0] * K
    for n in range(1, K + 1):
        rest = 0.0
        for s in range(1, n):
            k = kappa[s - 1]
            if k != 0.0:
                rest += k * float(table.coef(s, n - s))
        kappa[n - 1] = float(table.m[n] - rest)
    return kappa
