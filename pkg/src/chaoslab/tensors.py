"""Symmetric tensors, the isometric basis embedding, and chaos evaluation.

A degree-k chaos coefficient vector ``v`` (in the shared multi-index basis)
embeds into the space of symmetric k-tensors via ``iota``:

    iota(v)[i_1..i_k] = multinomial(k; type(i))^{-1/2} * v[type(i)],

which is an isometry, ``<iota(u), iota(v)>_F = <u, v>``, and sends
``q_k(w)`` to ``w^{tensor k}``.  The tensor pairing against the Hermite
tensor ``H_k(x) = iota(h_k(x))`` has closed forms for k <= 3 built from
monic Hermite polynomials; higher orders are only reached through rank-one
directions ``q_k(u)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, OrderError
from .indexing import basis_dim, index_tuples, sqrt_multinomials

__all__ = [
    "SymTensor",
    "iota",
    "iota_inverse",
    "contract_r",
    "monic_chaos_eval",
    "chaos_eval_batch",
    "wick_product_mean",
]

SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class SymTensor:
    """Dense symmetric tensor of a given order over ``[d]^k``."""

    order: int
    dim: int
    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        if entries.shape != (self.dim,) * self.order:
            raise ValueError(
                f"entries shape {entries.shape} does not match order/dim "
                f"({self.order}, {self.dim})"
            )
        object.__setattr__(self, "entries", entries)
        if not self.is_symmetric():
            raise ValueError("entries are not symmetric under index permutation")

    def is_symmetric(self, tol: float = SYMMETRY_TOL) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.entries))) if self.entries.size else 1.0)
        for perm in itertools.permutations(range(self.order)):
            if not np.allclose(
                self.entries, self.entries.transpose(perm), atol=tol * scale, rtol=0.0
            ):
                return False
        return True

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.entries.ravel()))


def iota(v: np.ndarray, k: int, d: int) -> SymTensor:
    """Embed a degree-k coefficient vector as a symmetric k-tensor."""
    v = np.asarray(v, dtype=float)
    if v.shape != (basis_dim(d, k),):
        raise ValueError(
            f"coefficient vector has length {v.shape}, expected ({basis_dim(d, k)},)"
        )
    if k < 1:
        raise OrderError(f"iota requires k >= 1, got {k}")
    vals = v / sqrt_multinomials(d, k)
    tuples = index_tuples(d, k)
    entries = np.zeros((d,) * k)
    cols = [tuples[:, j] for j in range(k)]
    for perm in itertools.permutations(range(k)):
        entries[tuple(cols[j] for j in perm)] = vals
    return SymTensor(order=k, dim=d, entries=entries)


def iota_inverse(T: SymTensor) -> np.ndarray:
    """Coefficient vector of a symmetric tensor (inverse of ``iota``)."""
    tuples = index_tuples(T.dim, T.order)
    rep = tuple(tuples[:, j] for j in range(T.order))
    return sqrt_multinomials(T.dim, T.order) * T.entries[rep]


def contract_r(S: SymTensor, T: SymTensor, r: int) -> np.ndarray:
    """Partial contraction over r shared indices; r = 0 is the tensor product.

    Returns a plain ndarray of order ``S.order + T.order - 2r`` (the result
    is generally not symmetric across the two index blocks).
    """
    if r < 0 or r > min(S.order, T.order):
        raise OrderError(f"r must lie in [0, {min(S.order, T.order)}], got {r}")
    if S.dim != T.dim:
        raise ValueError(f"dimension mismatch: {S.dim} vs {T.dim}")
    if r == 0:
        return np.tensordot(S.entries, T.entries, axes=0)
    axes_s = list(range(S.order - r, S.order))
    axes_t = list(range(T.order - r, T.order))
    return np.tensordot(S.entries, T.entries, axes=(axes_s, axes_t))


def chaos_eval_batch(T: SymTensor, X: np.ndarray) -> np.ndarray:
    """``<T, H_k(x)>`` for each column of ``X`` (d x n), orders k <= 3.

    Closed forms via monic Hermite polynomials:
        k=1:  <T, x>
        k=2:  (x'Tx - tr T) / sqrt(2)
        k=3:  (sum T_ijk x_i x_j x_k - 3 sum_j (sum_i T_iij) x_j) / sqrt(6)
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != T.dim:
        raise ValueError(f"X must have shape ({T.dim}, n), got {X.shape}")
    A = T.entries
    if T.order == 1:
        return A @ X
    if T.order == 2:
        quad = np.einsum("ij,in,jn->n", A, X, X, optimize=True)
        return (quad - np.trace(A)) / np.sqrt(2.0)
    if T.order == 3:
        cubic = np.einsum("ijk,in,jn,kn->n", A, X, X, X, optimize=True)
        partial_trace = np.einsum("iij->j", A)
        return (cubic - 3.0 * (partial_trace @ X)) / np.sqrt(6.0)
    raise OrderError(
        f"dense chaos evaluation supports orders 1..3, got {T.order}; "
        "use rank-one directions for higher orders"
    )


def monic_chaos_eval(T: SymTensor, x: np.ndarray) -> float:
    """``<T, H_k(x)>`` at a single point, orders k <= 3."""
    x = np.asarray(x, dtype=float)
    return float(chaos_eval_batch(T, x.reshape(-1, 1))[0])


# -- product moments of Hermite polynomials (test oracle) --------------------

WICK_MAX_FACTORS = 4
WICK_MAX_TOTAL_DEGREE = 24


def wick_product_mean(pairs: list[tuple[int, np.ndarray]]) -> float:
    """``E[prod_i He_{k_i}(<w_i, x>)]`` by multigraph enumeration.

    Sums ``val(G) = prod_{i<j} <w_i,w_j>^{nu_ij} / nu_ij!`` over all
    multigraphs without self-loops on the factors with degree sequence
    ``(k_i)``, scaled by ``prod sqrt(k_i!)``.
    """
    if not pairs:
        raise ValueError("need at least one factor")
    if len(pairs) > WICK_MAX_FACTORS:
        raise CapacityError(f"at most {WICK_MAX_FACTORS} factors supported")
    degrees = [int(k) for k, _ in pairs]
    vectors = [np.asarray(w, dtype=float) for _, w in pairs]
    if any(k < 0 for k in degrees):
        raise OrderError("Hermite orders must be nonnegative")
    if sum(degrees) > WICK_MAX_TOTAL_DEGREE:
        raise CapacityError(f"total degree capped at {WICK_MAX_TOTAL_DEGREE}")
    for w in vectors:
        if abs(np.linalg.norm(w) - 1.0) > 1e-8:
            raise ValueError("each w_i must be a unit vector")
    if sum(degrees) % 2 == 1:
        return 0.0

    m = len(pairs)
    edges = list(itertools.combinations(range(m), 2))
    gram = {(i, j): float(vectors[i] @ vectors[j]) for i, j in edges}
    total = 0.0

    def assign(edge_idx: int, residual: list[int], val: float):
        nonlocal total
        if edge_idx == len(edges):
            if all(rd == 0 for rd in residual):
                total += val
            return
        i, j = edges[edge_idx]
        # remaining edges that can still absorb degree at each vertex
        cap = min(residual[i], residual[j])
        for nu in range(cap + 1):
            assign(
                edge_idx + 1,
                [rd - nu if t in (i, j) else rd for t, rd in enumerate(residual)],
                val * gram[(i, j)] ** nu / math.factorial(nu),
            )

    assign(0, degrees, 1.0)
    scale = math.prod(math.sqrt(math.factorial(k)) for k in degrees)
    return scale * total
