"""
Probability laws given by finite moment sequences.

A :class:`Law` stores raw moments ``m_1..m_K`` and derives its free cumulants
lazily.  ``K`` (the *order*) is the capacity of the law: engines that need a
moment or cumulant beyond it raise :class:`~freesum.errors.CapacityError`.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Sequence

import numpy as np

from .errors import CapacityError
from .nc_core import catalan, moments_to_free_cumulants

DEFAULT_ORDER = 16
ATOM_TOL = 1e-12

__all__ = [
    "Law",
    "semicircular",
    "rademacher",
    "from_atoms",
    "from_moments",
    "law_from_json",
    "DEFAULT_ORDER",
]


@dataclass(frozen=True, eq=False)
class Law:
    """
    A law on the real line known through its first ``order`` moments.

    Two laws compare equal when their stored moment sequences are identical;
    ``name``, ``kind`` and ``params`` are descriptive only.
    """

    name: str
    moments: tuple[float, ...]
    kind: str = "moments"
    params: dict = field(default_factory=dict)
    exact_cumulants: tuple[float, ...] | None = None

    @property
    def order(self) -> int:
        return len(self.moments)

    @property
    def centered(self) -> bool:
        return self.moments[0] == 0.0

    @property
    def unit_variance(self) -> bool:
        return len(self.moments) >= 2 and abs(self.moments[1] - 1.0) <= ATOM_TOL

    def moment(self, k: int) -> float:
        """The k-th raw moment; ``moment(0) == 1``."""
        if k == 0:
            return 1.0
        if k > self.order:
            raise CapacityError(f"law {self.name!r} stores moments up to order {self.order}, {k} requested")
        return self.moments[k - 1]

    @cached_property
    def cumulants(self) -> tuple[float, ...]:
        if self.exact_cumulants is not None:
            return self.exact_cumulants
        return tuple(moments_to_free_cumulants(self.moments))

    def cumulant(self, k: int) -> float:
        if k > self.order:
            raise CapacityError(f"law {self.name!r} stores cumulants up to order {self.order}, {k} requested")
        return self.cumulants[k - 1]

    def even_moment_sup(self, k: int) -> float:
        """``max_{1 <= l <= k} m_{2l}``."""
        return max(self.moment(2 * l) for l in range(1, k + 1))

    def with_order(self, order: int) -> "Law":
        """Rebuild the law with a different moment capacity (constructor laws only)."""
        if self.kind == "moments":
            if order > self.order:
                raise CapacityError(f"law {self.name!r} is a bare moment sequence of order {self.order}")
            return from_moments(self.moments[:order], name=self.name)
        return law_from_json({"name": self.name, "kind": self.kind, "params": {**self.params, "order": order}})

    def to_json(self) -> dict[str, Any]:
        params = dict(self.params)
        if self.kind == "moments":
            params = {"moments": list(self.moments)}
        elif self.order != DEFAULT_ORDER:
            params["order"] = self.order
        return {"name": self.name, "kind": self.kind, "params": params}

    @cached_property
    def _hash(self) -> int:
        return hash(self.moments)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if not isinstance(other, Law):
            return NotImplemented
        return self.moments == other.moments

    def __repr__(self):
        return f"Law({self.name!r}, order={self.order})"


def semicircular(variance: float = 1.0, order: int = DEFAULT_ORDER) -> Law:
    """Centered semicircular law: ``m_2k = Catalan(k) * variance**k``, odd moments 0."""
    if not variance > 0:
        raise ValueError(f"variance must be positive, got {variance}")
    moments = tuple(
        float(catalan(k // 2)) * variance ** (k // 2) if k % 2 == 0 else 0.0 for k in range(1, order + 1)
    )
    kappa = tuple(float(variance) if k == 2 else 0.0 for k in range(1, order + 1))
    name = "semicircular" if variance == 1.0 else f"semicircular({variance:g})"
    return Law(name, moments, "semicircular", {"variance": variance}, exact_cumulants=kappa)


def rademacher(order: int = DEFAULT_ORDER) -> Law:
    """The law ``(delta_1 + delta_{-1}) / 2``."""
    moments = tuple(1.0 if k % 2 == 0 else 0.0 for k in range(1, order + 1))
    return Law("rademacher", moments, "rademacher", {})


def from_atoms(atoms: Sequence[tuple[float, float]], order: int = DEFAULT_ORDER, name: str = "atoms") -> Law:
    """
    Discrete law ``sum_j w_j delta_{x_j}`` from ``(position, weight)`` pairs.

    Raises
    ------
    ValueError
        If a weight is not positive or the weights do not sum to 1.
    """
    atoms = [(float(x), float(w)) for x, w in atoms]
    if not atoms:
        raise ValueError("at least one atom is required")
    if any(w <= 0 for _, w in atoms):
        raise ValueError("atom weights must be positive")
    total = math.fsum(w for _, w in atoms)
    if abs(total - 1.0) > ATOM_TOL:
        raise ValueError(f"atom weights sum to {total!r}, not 1")
    moments = tuple(math.fsum(w * x**k for x, w in atoms) for k in range(1, order + 1))
    return Law(name, moments, "atoms", {"atoms": [[x, w] for x, w in atoms]})


def _hankel_psd(moments: Sequence[float]) -> bool:
    m = [1.0] + list(moments)
    size = (len(m) - 1) // 2 + 1
    H = np.array([[m[i + j] for j in range(size)] for i in range(size)])
    eig = np.linalg.eigvalsh(H)
    return bool(eig.min() >= -1e-9 * max(1.0, abs(eig).max()))


def from_moments(moments: Sequence[float], name: str = "moments", check: bool = True) -> Law:
    """
    Law given directly by its moments ``m_1..m_K`` (``K >= 2``).

    A Hankel matrix that is not positive semidefinite only triggers a
    warning: formal moment sequences are allowed.
    """
    moments = tuple(float(x) for x in moments)
    if len(moments) < 2:
        raise ValueError("need at least two moments")
    if check and not _hankel_psd(moments):
        warnings.warn(f"moment sequence {name!r} has a non-PSD Hankel matrix", RuntimeWarning, stacklevel=2)
    return Law(name, moments, "moments", {})


def law_from_json(obj: dict | str) -> Law:
    """Build a law from ``{"name", "kind", "params"}`` (dict or JSON text)."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    kind = obj.get("kind")
    params = dict(obj.get("params") or {})
    order = int(params.pop("order", DEFAULT_ORDER))
    if kind == "semicircular":
        law = semicircular(float(params.get("variance", 1.0)), order=order)
    elif kind == "rademacher":
        law = rademacher(order=order)
    elif kind == "atoms":
        law = from_atoms([tuple(a) for a in params["atoms"]], order=order)
    elif kind == "moments":
        law = from_moments(params["moments"])
    else:
        raise ValueError(f"unknown law kind {kind!r}")
    name = obj.get("name")
    if name and name != law.name:
        law = Law(name, law.moments, law.kind, law.params, law.exact_cumulants)
    return law
