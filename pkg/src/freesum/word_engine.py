"""
Exact moments of words and polynomials in freely independent variables.

The mixed moment of a word ``X_{w_1} ... X_{w_n}`` is the sum, over
non-crossing partitions ``pi`` finer than the kernel of ``w``, of the product
of free cumulants ``kappa_{|B|}`` of the variable carried by each block.  It is
evaluated here by first-block recursion with a memo keyed on the kernel
pattern of the word plus the law attached to each class, so that any two words
that differ only by a relabelling of their variables share one evaluation.
"""

from __future__ import annotations

import itertools
import math
import threading
from collections import defaultdict
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import SizeLimitError
from .laws import Law

Word = tuple
Assignment = Mapping[Hashable, Law]

DEFAULT_TUPLE_CAP = 50_000_000
_CHUNK_ROWS = 1 << 18

__all__ = [
    "NCPolynomial",
    "FreeEvaluator",
    "word_moment",
    "polynomial_moment",
    "centered_insertion_check",
    "canonical_pattern",
    "DEFAULT_EVALUATOR",
]


def canonical_pattern(word: Sequence[Hashable]) -> tuple[tuple[int, ...], list]:
    """Relabel letters by order of first appearance; also return the letters in that order."""
    seen: dict = {}
    pattern = []
    for letter in word:
        if letter not in seen:
            seen[letter] = len(seen)
        pattern.append(seen[letter])
    return tuple(pattern), list(seen)


class NCPolynomial:
    """
    Polynomial in non-commuting variables with real coefficients.

    Stored as a map from words (tuples of variable labels) to coefficients;
    the empty word carries the scalar part.  Zero coefficients are dropped.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple, float] | Iterable[tuple[tuple, float]] | None = None):
        acc: dict[tuple, float] = defaultdict(float)
        items = terms.items() if isinstance(terms, Mapping) else (terms or ())
        for word, coef in items:
            acc[tuple(word)] += float(coef)
        self.terms = {w: c for w, c in acc.items() if c != 0.0}

    @classmethod
    def variable(cls, label) -> "NCPolynomial":
        return cls({(label,): 1.0})

    @classmethod
    def scalar(cls, c: float) -> "NCPolynomial":
        return cls({(): c})

    def __add__(self, other):
        other = _as_poly(other)
        return NCPolynomial(itertools.chain(self.terms.items(), other.terms.items()))

    __radd__ = __add__

    def __neg__(self):
        return NCPolynomial({w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return NCPolynomial({w: c * other for w, c in self.terms.items()})
        other = _as_poly(other)
        return NCPolynomial(
            (a + b, ca * cb) for a, ca in self.terms.items() for b, cb in other.terms.items()
        )

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return self * other
        return _as_poly(other) * self

    def __pow__(self, m: int):
        out = NCPolynomial.scalar(1.0)
        for _ in range(m):
            out = out * self
        return out

    def adjoint(self) -> "NCPolynomial":
        """Reverse every word (real coefficients, self-adjoint variables)."""
        return NCPolynomial({w[::-1]: c for w, c in self.terms.items()})

    @property
    def degree(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def variables(self) -> set:
        return {x for w in self.terms for x in w}

    def __eq__(self, other):
        return isinstance(other, NCPolynomial) and self.terms == other.terms

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        if not self.terms:
            return "NCPolynomial(0)"
        body = " + ".join(f"{c:g}*{'.'.join(map(str, w)) or '1'}" for w, c in self.terms.items())
        return f"NCPolynomial({body})"


def _as_poly(x) -> NCPolynomial:
    if isinstance(x, NCPolynomial):
        return x
    if isinstance(x, (int, float)):
        return NCPolynomial.scalar(x)
    raise TypeError(f"cannot use {type(x).__name__} as a polynomial")


class FreeEvaluator:
    """
    Memoizing evaluator of free mixed moments.

    Laws are interned to small integer ids; the memo key of a word is its
    canonical kernel pattern together with the law id of each class.  The
    memo only grows, and inserts are idempotent, so sharing one evaluator
    between threads is safe under the interpreter lock.
    """

    def __init__(self):
        self._laws: list[Law] = []
        self._law_ids: dict[Law, int] = {}
        self._memo: dict[tuple, float] = {}
        self._lock = threading.Lock()

    def law_id(self, law: Law) -> int:
        lid = self._law_ids.get(law)
        if lid is None:
            with self._lock:
                lid = self._law_ids.setdefault(law, len(self._laws))
                if lid == len(self._laws):
                    self._laws.append(law)
        return lid

    @property
    def memo_size(self) -> int:
        return len(self._memo)

    def clear(self):
        self._memo.clear()

    def word_moment(self, word: Sequence[Hashable], assignment: Assignment) -> float:
        """phi of the word under freely independent variables with the given laws."""
        if len(word) == 0:
            return 1.0
        pattern, letters = canonical_pattern(word)
        try:
            tags = tuple(self.law_id(assignment[x]) for x in letters)
        except KeyError as exc:
            raise ValueError(f"variable {exc.args[0]!r} has no law in the assignment") from None
        return self._phi(pattern, tags)

    def pattern_moment(self, pattern: tuple[int, ...], tags: tuple[int, ...]) -> float:
        """phi for an already canonical pattern with law ids per class."""
        return self._phi(pattern, tags)

    def _sub(self, pattern, tags, lo, hi) -> float:
        # moment of the contiguous piece pattern[lo:hi], re-canonicalised
        if lo >= hi:
            return 1.0
        seen: dict = {}
        sub = []
        for c in pattern[lo:hi]:
            if c not in seen:
                seen[c] = len(seen)
            sub.append(seen[c])
        return self._phi(tuple(sub), tuple(tags[c] for c in seen))

    def _phi(self, pattern: tuple[int, ...], tags: tuple[int, ...]) -> float:
        n = len(pattern)
        if n == 0:
            return 1.0
        key = (pattern, tags)
        val = self._memo.get(key)
        if val is not None:
            return val
        laws = self._laws
        counts = [0] * len(tags)
        for c in pattern:
            counts[c] += 1
        if any(cnt == 1 and laws[t].cumulant(1) == 0.0 for cnt, t in zip(counts, tags)):
            self._memo[key] = 0.0
            return 0.0
        law = laws[tags[0]]
        pos = [q for q in range(n) if pattern[q] == 0]
        # block of position 0 runs through pos[0] = 0 < pos[j1] < ...;
        # T(j, s): block has s points, the last being pos[j]
        T: dict[tuple[int, int], float] = {}
        for j in range(len(pos) - 1, -1, -1):
            for s in range(j + 1, 1 if j else 0, -1):
                kap = law.cumulant(s)
                acc = kap * self._sub(pattern, tags, pos[j] + 1, n) if kap != 0.0 else 0.0
                for jj in range(j + 1, len(pos)):
                    nxt = T[(jj, s + 1)]
                    if nxt != 0.0:
                        gap = self._sub(pattern, tags, pos[j] + 1, pos[jj])
                        if gap != 0.0:
                            acc += gap * nxt
                T[(j, s)] = acc
        val = T[(0, 1)]
        self._memo[key] = val
        return val

    # ------------------------------------------------------------------
    # polynomial moments
    # ------------------------------------------------------------------

    def polynomial_moment(
        self,
        poly: NCPolynomial,
        assignment: Assignment,
        m: int = 1,
        cap: int = DEFAULT_TUPLE_CAP,
    ) -> float:
        """
        ``phi(P^m)`` by expanding the m-fold product over support words.

        The expansion is vectorized: each chunk of concatenated words is
        reduced to (kernel pattern, law per position) keys, weights are
        aggregated per key, and each distinct key is evaluated once.

        Raises
        ------
        SizeLimitError
            If the number of support tuples ``|supp P|^m`` exceeds ``cap``.
        """
        if m < 1:
            raise ValueError("m must be >= 1")
        if not poly.terms:
            return 0.0
        total = len(poly.terms) ** m
        if total > cap:
            raise SizeLimitError(f"expansion of {len(poly.terms)}^{m} = {total} tuples exceeds cap {cap}")
        variables = sorted(poly.variables(), key=repr)
        code = {x: i for i, x in enumerate(variables)}
        try:
            law_codes = np.array([self.law_id(assignment[x]) for x in variables] or [0], dtype=np.int64)
        except KeyError as exc:
            raise ValueError(f"variable {exc.args[0]!r} has no law in the assignment") from None

        groups: dict[int, tuple[list, list]] = defaultdict(lambda: ([], []))
        for w, c in poly.terms.items():
            words, coefs = groups[len(w)]
            words.append([code[x] for x in w])
            coefs.append(c)
        packed = {
            length: (np.array(ws, dtype=np.int64).reshape(len(ws), length), np.array(cs))
            for length, (ws, cs) in groups.items()
        }

        weights: dict = defaultdict(list)
        for lengths in itertools.product(sorted(packed), repeat=m):
            factors = [packed[length] for length in lengths]
            for key, w in _expand(factors, law_codes):
                weights[key].append(w)

        result = []
        for (L, n_laws, raw), ws in weights.items():
            pattern, lawpos = _decode(raw, L, n_laws)
            tags = _class_tags(pattern, lawpos)
            val = self._phi(pattern, tags)
            if val != 0.0:
                result.append(val * math.fsum(ws))
        return math.fsum(result)


def _class_tags(pattern, lawpos) -> tuple[int, ...]:
    tags = []
    for c, t in zip(pattern, lawpos):
        if c == len(tags):
            tags.append(int(t))
    return tuple(tags)


def _kernel_labels(W: np.ndarray) -> np.ndarray:
    """Row-wise first-occurrence relabelling of an integer array (B, L)."""
    B, L = W.shape
    eq = W[:, :, None] == W[:, None, :]
    first = eq.argmax(axis=2)
    is_new = first == np.arange(L)
    newlab = np.cumsum(is_new, axis=1) - 1
    return np.take_along_axis(newlab, first, axis=1)


def _encode(labels: np.ndarray, lawpos: np.ndarray, n_laws: int):
    # mixed-radix int64 key when it fits, raw bytes otherwise
    B, L = labels.shape
    bits = L * math.log2(max(L, 2)) + (L * math.log2(n_laws) if n_laws > 1 else 0)
    if bits < 62:
        key = np.zeros(B, dtype=np.int64)
        for p in range(L):
            key = key * L + labels[:, p]
        if n_laws > 1:
            for p in range(L):
                key = key * n_laws + lawpos[:, p]
        return key, False
    dtype = np.uint8 if max(L, n_laws) < 256 else np.uint16
    arr = np.ascontiguousarray(np.concatenate([labels, lawpos], axis=1).astype(dtype))
    return arr.view(np.dtype((np.void, arr.shape[1] * arr.itemsize))).ravel(), True


def _decode(raw, L: int, n_laws: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    if isinstance(raw, bytes):
        dtype = np.uint8 if max(L, n_laws) < 256 else np.uint16
        arr = np.frombuffer(raw, dtype=dtype)
        return tuple(int(x) for x in arr[:L]), tuple(int(x) for x in arr[L:])
    key = int(raw)
    lawpos = [0] * L
    if n_laws > 1:
        for p in range(L - 1, -1, -1):
            key, lawpos[p] = divmod(key, n_laws)
    labels = [0] * L
    for p in range(L - 1, -1, -1):
        key, labels[p] = divmod(key, L)
    return tuple(labels), tuple(lawpos)


def _expand(factors, law_codes):
    """Yield ((L, n_laws, key), weight) aggregated over one length combination."""
    m = len(factors)
    L = sum(W.shape[1] for W, _ in factors)
    n_laws = int(law_codes.max()) + 1
    if L == 0:
        yield (0, n_laws, 0), float(np.prod([c[0] for _, c in factors]))
        return
    # vectorize the trailing factors, loop in Python over the leading ones
    split = m
    inner = 1
    while split > 0 and inner * len(factors[split - 1][1]) <= _CHUNK_ROWS:
        split -= 1
        inner *= len(factors[split][1])
    if split == m:
        split = m - 1  # the last factor alone is chunked by rows below
    inner_W, inner_c = _product_block(factors[split:])
    lead = factors[:split]
    acc: dict = defaultdict(float)
    for combo in itertools.product(*(range(len(c)) for _, c in lead)):
        prefix = [W[i] for (W, _), i in zip(lead, combo)]
        pc = 1.0
        for (_, c), i in zip(lead, combo):
            pc *= c[i]
        for lo in range(0, len(inner_c), _CHUNK_ROWS):
            Wi = inner_W[lo : lo + _CHUNK_ROWS]
            ci = inner_c[lo : lo + _CHUNK_ROWS] * pc
            if prefix:
                pre = np.concatenate(prefix)
                Wfull = np.concatenate([np.broadcast_to(pre, (len(Wi), len(pre))), Wi], axis=1)
            else:
                Wfull = Wi
            labels = _kernel_labels(Wfull)
            lawpos = law_codes[Wfull]
            keys, is_bytes = _encode(labels, lawpos, n_laws)
            uniq, inv = np.unique(keys, return_inverse=True)
            sums = np.bincount(inv.ravel(), weights=ci, minlength=len(uniq))
            for k, s in zip(uniq, sums):
                acc[k.tobytes() if is_bytes else int(k)] += float(s)
    for k, s in acc.items():
        yield (L, n_laws, k), s


def _product_block(factors):
    W = np.zeros((1, 0), dtype=np.int64)
    c = np.ones(1)
    for Wf, cf in factors:
        n0, n1 = len(c), len(cf)
        W = np.concatenate([np.repeat(W, n1, axis=0), np.tile(Wf, (n0, 1))], axis=1)
        c = np.repeat(c, n1) * np.tile(cf, n0)
    return W, c


DEFAULT_EVALUATOR = FreeEvaluator()


def word_moment(word: Sequence[Hashable], assignment: Assignment, evaluator: FreeEvaluator | None = None) -> float:
    """
    Mixed moment ``phi(X_{w_1} ... X_{w_n})`` of freely independent variables.

    Parameters
    ----------
    word : sequence of hashable
        Variable labels; an empty word has moment 1.
    assignment : mapping
        Law of every variable that appears in ``word``.

    Raises
    ------
    ValueError
        A letter of the word has no law.
    CapacityError
        A cumulant beyond the stored order of a law is needed.
    """
    return (evaluator or DEFAULT_EVALUATOR).word_moment(word, assignment)


def polynomial_moment(
    poly: NCPolynomial,
    assignment: Assignment,
    m: int = 1,
    cap: int = DEFAULT_TUPLE_CAP,
    evaluator: FreeEvaluator | None = None,
) -> float:
    """``phi(P^m)``; see :meth:`FreeEvaluator.polynomial_moment`."""
    return (evaluator or DEFAULT_EVALUATOR).polynomial_moment(poly, assignment, m, cap=cap)


_Y = ("__inserted__",)


def centered_insertion_check(
    word: Sequence[Hashable],
    assignment: Assignment,
    positions: Sequence[int],
    y_law: Law,
    z_law: Law,
    evaluator: FreeEvaluator | None = None,
) -> tuple[float, float]:
    """
    Insert a fresh variable into ``word`` at one or two places, once with
    law ``y_law`` and once with ``z_law``, and return both moments.

    ``positions`` holds one or two cut points ``0 <= r <= s <= len(word)``;
    a cut point ``r`` means "after the first r letters".  With one cut both
    values vanish for centered inserted laws; with two cuts (the same fresh
    variable at both places) they agree for centered unit-variance laws.
    """
    cuts = sorted(positions)
    if len(cuts) not in (1, 2) or cuts[0] < 0 or cuts[-1] > len(word):
        raise ValueError(f"invalid insertion positions {positions!r} for a word of length {len(word)}")
    if _Y in assignment:
        raise ValueError("assignment already uses the reserved insertion label")
    word = list(word)
    spliced: list = []
    prev = 0
    for c in cuts:
        spliced.extend(word[prev:c])
        spliced.append(_Y)
        prev = c
    spliced.extend(word[prev:])
    ev = evaluator or DEFAULT_EVALUATOR
    out = []
    for law in (y_law, z_law):
        a = dict(assignment)
        a[_Y] = law
        out.append(ev.word_moment(spliced, a))
    return out[0], out[1]
