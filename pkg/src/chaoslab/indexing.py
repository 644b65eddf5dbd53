"""Multi-index bookkeeping for degree-k Hermite bases.

A degree-k basis element over ``R^d`` is a multi-index ``(k_1, ..., k_d)``
with ``sum k_j = k``; there are ``B(d, k) = C(d+k-1, k)`` of them.  All
coefficient vectors in the library share one fixed ordering of these
multi-indices: graded reverse lexicographic at fixed total order, i.e.
``alpha`` precedes ``beta`` iff the rightmost nonzero entry of
``alpha - beta`` is negative.  Equivalently, representing each multi-index
by its sorted tuple of variable indices (with repetition), the basis is
enumerated in colexicographic tuple order:

    d=3, k=2:  (0,0) (0,1) (1,1) (0,2) (1,2) (2,2)
    exponents:  200   110   020   101   011   002

This ordering is what makes coefficient vectors serializable and
reproducible across modules; do not reorder.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import OrderError

__all__ = [
    "basis_dim",
    "index_tuples",
    "exponent_table",
    "sqrt_multinomials",
    "MultiIndex",
]


def basis_dim(d: int, k: int) -> int:
    """Number of degree-k multi-indices over d variables, C(d+k-1, k)."""
    if d < 1 or k < 0:
        raise OrderError(f"need d >= 1 and k >= 0, got d={d}, k={k}")
    return math.comb(d + k - 1, k)


def _colex_tuples(d: int, k: int):
    if k == 0:
        yield ()
        return
    for m in range(d):
        for rest in _colex_tuples(m + 1, k - 1):
            yield rest + (m,)


@lru_cache(maxsize=None)
def index_tuples(d: int, k: int) -> np.ndarray:
    """Sorted variable-index tuples of every basis element, shape (B, k).

    Row ``b`` holds the variables of the b-th multi-index with repetition,
    nondecreasing; rows appear in the library's fixed (grevlex) order.
    """
    if k < 1:
        raise OrderError(f"index_tuples requires k >= 1, got k={k}")
    out = np.array(list(_colex_tuples(d, k)), dtype=np.int64)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def exponent_table(d: int, k: int) -> np.ndarray:
    """Exponent vectors of every basis element, shape (B, d)."""
    tuples = index_tuples(d, k)
    table = np.zeros((tuples.shape[0], d), dtype=np.int64)
    rows = np.repeat(np.arange(tuples.shape[0]), k)
    np.add.at(table, (rows, tuples.ravel()), 1)
    table.setflags(write=False)
    return table


@lru_cache(maxsize=None)
def sqrt_multinomials(d: int, k: int) -> np.ndarray:
    """sqrt(k! / prod_j k_j!) for every basis element, shape (B,)."""
    tuples = index_tuples(d, k)
    out = np.empty(tuples.shape[0])
    for b, row in enumerate(tuples):
        counts: dict[int, int] = {}
        for j in row:
            counts[j] = counts.get(j, 0) + 1
        denom = 1
        for c in counts.values():
            denom *= math.factorial(c)
        out[b] = math.sqrt(math.factorial(k) / denom)
    out.setflags(write=False)
    return out


class MultiIndex:
    """A single degree-k multi-index (exponent vector) with order checks."""

    __slots__ = ("exponents",)

    def __init__(self, exponents):
        exps = tuple(int(e) for e in exponents)
        if any(e < 0 for e in exps):
            raise OrderError("multi-index exponents must be nonnegative")
        self.exponents = exps

    @property
    def order(self) -> int:
        return sum(self.exponents)

    @property
    def dim(self) -> int:
        return len(self.exponents)

    def position(self) -> int:
        """Position of this multi-index in the fixed basis ordering."""
        table = exponent_table(self.dim, self.order)
        hits = np.flatnonzero((table == np.asarray(self.exponents)).all(axis=1))
        return int(hits[0])

    def __eq__(self, other) -> bool:
        return isinstance(other, MultiIndex) and self.exponents == other.exponents

    def __hash__(self) -> int:
        return hash(self.exponents)

    def __repr__(self) -> str:
        return f"MultiIndex{self.exponents}"
