"""Normalized Hermite polynomials and activation expansions.

Conventions (fixed across the library):

* ``He_k`` is the *orthonormal* probabilists' Hermite polynomial,
  ``E[He_j(G) He_k(G)] = delta_jk`` for ``G ~ N(0,1)``, with leading
  coefficient ``1/sqrt(k!)``.  Evaluation uses the three-term recurrence
  ``sqrt(k+1) He_{k+1}(x) = x He_k(x) - sqrt(k) He_{k-1}(x)``.
* An activation ``sigma`` expands as ``sigma(u) = sum_k mu_k He_k(u)`` with
  ``mu_k = E[sigma(G) He_k(G)]``; coefficients are computed by
  Gauss-Hermite quadrature, exact for polynomial ``sigma``.
* ``q_k(w)`` is the coefficient vector of ``He_k(<w, x>)`` in the shared
  degree-k basis (see ``indexing``): entry ``(k_1..k_d)`` equals
  ``sqrt(k!/prod k_j!) * prod_j w_j^{k_j}``, and ``|q_k(w)|_2 = 1`` for
  unit ``w``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import numpy.polynomial.hermite_e as _hermite_e

from .errors import OrderError
from .indexing import index_tuples, sqrt_multinomials

__all__ = [
    "he",
    "he_table",
    "ActivationSpec",
    "HermiteCoeffs",
    "hermite_coeff",
    "hermite_coeffs",
    "gauss_hermite_nodes",
    "q_k",
]

UNIT_NORM_TOL = 1e-10

#: quadrature size for non-polynomial activations (relu), per the default
#: truncation degree 8; coefficients beyond are dropped into mu_gt2 exactly
#: as truncated.
RELU_QUAD_NODES = 200
RELU_DEFAULT_DEGREE = 8


def he(k: int, x):
    """Orthonormal Hermite polynomial ``He_k`` evaluated at ``x``.

    ``x`` may be a scalar or ndarray; total on reals.
    """
    if k < 0:
        raise OrderError(f"Hermite order must be >= 0, got {k}")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if k == 0:
        return prev if prev.ndim else float(prev)
    cur = x.copy()
    for j in range(1, k):
        prev, cur = cur, (x * cur - np.sqrt(j) * prev) / np.sqrt(j + 1)
    return cur if cur.ndim else float(cur)


def he_table(kmax: int, x: np.ndarray) -> np.ndarray:
    """All of ``He_0..He_kmax`` at once; shape ``(kmax+1,) + x.shape``."""
    x = np.asarray(x, dtype=float)
    out = np.empty((kmax + 1,) + x.shape)
    out[0] = 1.0
    if kmax >= 1:
        out[1] = x
    for j in range(1, kmax):
        out[j + 1] = (x * out[j] - np.sqrt(j) * out[j - 1]) / np.sqrt(j + 1)
    return out


def gauss_hermite_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights for E_{G~N(0,1)}[f(G)] ~ sum w_i f(x_i), sum w = 1."""
    x, w = _hermite_e.hermegauss(n)
    return x, w / np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class ActivationSpec:
    """An activation together with its coefficient-extraction degree cap.

    kind is one of ``polynomial`` (power-basis ``coeffs``), ``relu`` or
    ``square``.  ``degree_cap`` is the truncation degree D used when
    extracting Hermite coefficients; for polynomials the degree must not
    exceed D.
    """

    kind: str
    coeffs: tuple[float, ...] = ()
    degree_cap: int = RELU_DEFAULT_DEGREE

    def __post_init__(self):
        if self.kind == "square":
            object.__setattr__(self, "coeffs", (0.0, 0.0, 1.0))
            if self.degree_cap == RELU_DEFAULT_DEGREE:
                object.__setattr__(self, "degree_cap", 2)
        if self.kind in ("polynomial", "square"):
            coeffs = tuple(float(c) for c in self.coeffs)
            if not coeffs:
                raise ValueError("polynomial activation needs coefficients")
            object.__setattr__(self, "coeffs", coeffs)
            if len(coeffs) - 1 > self.degree_cap:
                raise OrderError(
                    f"polynomial degree {len(coeffs) - 1} exceeds degree_cap "
                    f"{self.degree_cap}"
                )
        elif self.kind != "relu":
            raise ValueError(f"unknown activation kind {self.kind!r}")

    @property
    def is_polynomial(self) -> bool:
        return self.kind in ("polynomial", "square")

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "relu":
            return np.maximum(u, 0.0)
        out = np.zeros_like(u)
        for c in reversed(self.coeffs):
            out = out * u + c
        return out


@dataclass(frozen=True)
class HermiteCoeffs:
    """Hermite coefficients ``(mu_0, ..., mu_D)`` of an activation.

    ``mu_gt2 = sqrt(sum_{k=3}^D mu_k^2)`` drives the Gaussian substitute
    for all chaos of order >= 3.
    """

    mu: tuple[float, ...]
    mu_gt2: float = field(init=False)

    def __post_init__(self):
        mu = tuple(float(m) for m in self.mu)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "mu_gt2", float(np.sqrt(sum(m * m for m in mu[3:]))))

    @property
    def degree(self) -> int:
        return len(self.mu) - 1

    def scaled(self, factors) -> "HermiteCoeffs":
        """Entrywise rescaling hook (for d-dependent activation schedules)."""
        factors = np.asarray(factors, dtype=float)
        if factors.shape != (len(self.mu),):
            raise ValueError("factors must match the coefficient vector length")
        return HermiteCoeffs(tuple(np.asarray(self.mu) * factors))


def hermite_coeff(sigma: ActivationSpec, k: int) -> float:
    """k-th Hermite coefficient ``mu_k = E[sigma(G) He_k(G)]`` by quadrature.

    Node count is ``ceil((D+k)/2) + 1`` (exact for polynomial sigma up to
    rounding); relu uses a fixed 200-node rule.
    """
    if k < 0 or k > sigma.degree_cap:
        raise OrderError(
            f"order {k} outside [0, {sigma.degree_cap}] for this activation"
        )
    if sigma.is_polynomial:
        n_nodes = (sigma.degree_cap + k + 1) // 2 + 1
    else:
        n_nodes = RELU_QUAD_NODES
    x, w = gauss_hermite_nodes(n_nodes)
    return float(np.dot(w, sigma(x) * he(k, x)))


def hermite_coeffs(sigma: ActivationSpec) -> HermiteCoeffs:
    """All coefficients ``mu_0..mu_D`` of ``sigma`` in one quadrature pass."""
    if sigma.is_polynomial:
        n_nodes = sigma.degree_cap + 2
    else:
        n_nodes = RELU_QUAD_NODES
    x, w = gauss_hermite_nodes(n_nodes)
    vals = sigma(x) * w
    table = he_table(sigma.degree_cap, x)
    return HermiteCoeffs(tuple(table @ vals))


def q_k(w: np.ndarray, k: int) -> np.ndarray:
    """Coefficient vector of ``He_k(<w, x>)`` for a unit vector ``w``."""
    w = np.asarray(w, dtype=float)
    if k < 1:
        raise OrderError(f"q_k requires k >= 1, got {k}")
    nrm = np.linalg.norm(w)
    if abs(nrm - 1.0) > UNIT_NORM_TOL:
        raise ValueError(f"w must be a unit vector, |w| = {nrm!r}")
    tuples = index_tuples(w.shape[0], k)
    return sqrt_multinomials(w.shape[0], k) * np.prod(w[tuples], axis=1)


def q_k_rows(W: np.ndarray, k: int) -> np.ndarray:
    """Row-wise ``q_k``: maps ``(p, d)`` weights to ``(p, B_{d,k})``.

    Materializes the full degree-k feature coefficient matrix; intended for
    diagnostics at small d only.
    """
    W = np.asarray(W, dtype=float)
    tuples = index_tuples(W.shape[1], k)
    return sqrt_multinomials(W.shape[1], k) * np.prod(W[:, tuples], axis=2)
