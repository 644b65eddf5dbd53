"""Sampling under the random-feature model and its Gaussian surrogates.

Four data models share one weight ensemble ``W`` (rows uniform on the unit
sphere) and one activation expansion ``sigma = sum_k mu_k He_k``:

* ``RF``   features ``sigma(W x)`` with ``x ~ N(0, I_d)``; latent signals
  are genuine chaos coordinates of ``x``.
* ``GE``   (quadratic scaling) every chaos block is replaced by an
  independent Gaussian: ``z = mu_0 1 + mu_1 W g_1 + mu_2 V_2 g_2 +
  mu_{>2} g_*``.
* ``PGE``  keeps chaos of order <= 2 exact (shared ``x`` with the latent)
  and Gaussianizes only orders >= 3.
* ``CGE``  conditions on the signal support ``x_S`` (canonically the first
  ``s`` coordinates): the ``x_S``-dependent order-1/2 feature terms are
  kept exact, everything orthogonal to the support is an independent
  Gaussian, and order-2 latent coordinates ride the same ``g_2`` as the
  features.

``g_2`` is never materialized as a basis vector: it is represented by a
``d x d`` symmetric Gaussian matrix ``M`` (diagonal variance 1,
off-diagonal 1/2), so that ``(V_2 g_2)_j = w_j' M w_j`` costs ``O(p d^2)``
per sample, and the support projection acts by zeroing the ``S x S`` block
of ``M``.

Determinism: each sampler consumes a private PCG64 stream derived from its
seed; identical (seed, config) reproduce batches bitwise.  At ``s = 0`` the
CGE sampler consumes draws in the same order as GE, so the two coincide
exactly for equal seeds.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import OrderError
from .hermite import ActivationSpec, HermiteCoeffs, he, he_table, q_k
from .seeding import make_rng
from .tensors import chaos_eval_batch, iota

__all__ = [
    "NoiseSpec",
    "LinkSpec",
    "ChaosCoordinate",
    "TargetSpec",
    "WeightEnsemble",
    "SampleBatch",
    "ModelSampler",
    "sample_weights",
    "rf_batch",
    "ge_batch_quadratic",
    "pge_batch",
    "cge_batch",
    "householder_to_e1",
    "save_batch_csv",
    "load_batch_csv",
]

MODEL_TAGS = ("RF", "GE", "PGE", "CGE")
COORD_NORM_TOL = 1e-8
GRAM_PSD_TOL = -1e-10

# memory budget (in float64 entries) for the (p, d, chunk) intermediate of
# the batched quadratic forms; the chunk size is a pure function of shapes
# so that batch bytes never depend on the host.
_QUAD_CHUNK_BUDGET = 4_000_000


def _sign_pm1(x: np.ndarray) -> np.ndarray:
    return np.where(x >= 0.0, 1.0, -1.0)


@dataclass(frozen=True)
class NoiseSpec:
    """Label noise law: ``none``, ``gaussian`` (sd = scale) or ``uniform``
    (on [-scale, scale])."""

    kind: str = "none"
    scale: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "gaussian", "uniform"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind != "none" and self.scale < 0:
            raise ValueError("noise scale must be nonnegative")

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "gaussian":
            return self.scale * rng.standard_normal(n)
        if self.kind == "uniform":
            return rng.uniform(-self.scale, self.scale, size=n)
        return np.zeros(n)


@dataclass(frozen=True)
class LinkSpec:
    """Label map ``y = eta(f; eps)`` applied to the latent signal rows.

    kinds:
      ``identity-sum``       y = offset + <weights, f> + eps
      ``sign-of-sum``        y = sign(offset + <weights, f> + eps)
      ``logistic-sign``      P(y=+1 | f) = 1 / (1 + exp(-scale * score)),
                             score = offset + <weights, f>, or the Hermite
                             polynomial of f_1 when ``coeffs`` is given
      ``hermite-single-index``  y = sum_k coeffs[k] He_k(f_1) (+ eps),
                             signed when ``binarize`` is set

    Sign ties resolve to +1.  The logistic kind draws its own uniform
    noise from the label stream and ignores additive ``eps``.
    """

    kind: str
    weights: tuple[float, ...] | None = None
    offset: float = 0.0
    scale: float = 1.0
    coeffs: tuple[float, ...] | None = None
    binarize: bool = False

    def __post_init__(self):
        if self.kind not in (
            "identity-sum",
            "sign-of-sum",
            "logistic-sign",
            "hermite-single-index",
        ):
            raise ValueError(f"unknown link kind {self.kind!r}")
        if self.weights is not None:
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if self.coeffs is not None:
            object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if self.kind in ("identity-sum", "sign-of-sum") and self.weights is None:
            raise ValueError(f"{self.kind} link requires weights")
        if self.kind == "hermite-single-index" and self.coeffs is None:
            raise ValueError("hermite-single-index link requires coeffs")
        if self.kind == "logistic-sign" and self.weights is None and self.coeffs is None:
            raise ValueError("logistic-sign link requires weights or coeffs")

    @property
    def arity(self) -> int:
        if self.coeffs is not None:
            return 1
        return len(self.weights)

    def _score(self, F: np.ndarray) -> np.ndarray:
        if self.coeffs is not None:
            table = he_table(len(self.coeffs) - 1, F[0])
            return self.offset + np.asarray(self.coeffs) @ table
        return self.offset + np.asarray(self.weights) @ F

    def labels(
        self, F: np.ndarray, eps: np.ndarray, rng: np.random.Generator
    ) -> np.ndarray:
        score = self._score(F)
        if self.kind == "identity-sum":
            return score + eps
        if self.kind == "sign-of-sum":
            return _sign_pm1(score + eps)
        if self.kind == "logistic-sign":
            u = rng.uniform(size=score.shape[0])
            prob = 1.0 / (1.0 + np.exp(-self.scale * score))
            return np.where(u < prob, 1.0, -1.0)
        value = score + eps
        return _sign_pm1(value) if self.binarize else value


@dataclass(frozen=True)
class ChaosCoordinate:
    """One latent coordinate ``xi = <beta, h_k(x)>`` of order k >= 2.

    Construct through the factories: ``explicit`` (unit coefficient
    vector), ``rank_one`` (``beta = q_k(u)``, supports k up to 4) or
    ``uniform_sphere`` (seeded draw from the unit sphere, k in {2, 3}).
    """

    order: int
    kind: str
    beta: np.ndarray | None = None
    u: np.ndarray | None = None

    def __post_init__(self):
        if self.order < 2:
            raise OrderError("chaos coordinates have order >= 2")
        if self.kind == "rank-one":
            if self.u is None:
                raise ValueError("rank-one coordinate needs a direction u")
            u = np.asarray(self.u, dtype=float)
            if abs(np.linalg.norm(u) - 1.0) > COORD_NORM_TOL:
                raise ValueError("rank-one direction must be a unit vector")
            if self.order > 4:
                raise OrderError("rank-one coordinates support order <= 4")
            object.__setattr__(self, "u", u)
        elif self.kind in ("explicit", "uniform-sphere"):
            if self.beta is None:
                raise ValueError(f"{self.kind} coordinate needs coefficients")
            beta = np.asarray(self.beta, dtype=float)
            if abs(np.linalg.norm(beta) - 1.0) > COORD_NORM_TOL:
                raise ValueError("coordinate coefficients must have unit norm")
            if self.order > 3:
                raise OrderError("dense coefficients support order <= 3 only")
            object.__setattr__(self, "beta", beta)
        else:
            raise ValueError(f"unknown coordinate kind {self.kind!r}")

    @staticmethod
    def explicit(order: int, beta) -> "ChaosCoordinate":
        return ChaosCoordinate(order=order, kind="explicit", beta=np.asarray(beta))

    @staticmethod
    def rank_one(order: int, u) -> "ChaosCoordinate":
        return ChaosCoordinate(order=order, kind="rank-one", u=np.asarray(u))

    @staticmethod
    def uniform_sphere(order: int, d: int, seed: int) -> "ChaosCoordinate":
        from .indexing import basis_dim

        g = make_rng(seed, "beta", order).standard_normal(basis_dim(d, order))
        return ChaosCoordinate(
            order=order, kind="uniform-sphere", beta=g / np.linalg.norm(g)
        )

    def vector(self, d: int) -> np.ndarray:
        """Dense coefficient vector in the shared basis."""
        if self.kind == "rank-one":
            return q_k(self.u, self.order)
        if self.beta.shape[0] != _basis_dim_checked(d, self.order):
            raise ValueError("coefficient length does not match dimension d")
        return self.beta

    def inner(self, other: "ChaosCoordinate", d: int) -> float:
        """<beta_self, beta_other> for same-order coordinates."""
        if self.order != other.order:
            return 0.0
        if self.kind == "rank-one" and other.kind == "rank-one":
            return float(self.u @ other.u) ** self.order
        return float(self.vector(d) @ other.vector(d))


def _basis_dim_checked(d: int, k: int) -> int:
    from .indexing import basis_dim

    return basis_dim(d, k)


@dataclass(frozen=True)
class TargetSpec:
    """Latent signal ``f_* = {x_1..x_s, xi_2, ..., xi_{D'}}`` plus link/noise.

    The order-1 block is canonical: the first ``s`` input coordinates carry
    the signal support (rotate general directions into this frame before
    sampling weights; see ``householder_to_e1``).
    """

    s: int
    higher: tuple[ChaosCoordinate, ...] = ()
    link: LinkSpec = LinkSpec(kind="identity-sum", weights=(1.0,))
    noise: NoiseSpec = NoiseSpec()

    def __post_init__(self):
        object.__setattr__(self, "higher", tuple(self.higher))
        if self.s < 0:
            raise ValueError("s must be nonnegative")
        if self.m != self.link.arity:
            raise ValueError(
                f"target has {self.m} latent coordinates but the link takes "
                f"{self.link.arity}"
            )

    @property
    def m(self) -> int:
        return self.s + len(self.higher)

    def orders_present(self) -> set[int]:
        return {c.order for c in self.higher}


class WeightEnsemble:
    """Random feature weights: p rows i.i.d. uniform on the unit sphere.

    Caches, per declared signal direction u, the projections
    ``r1 = W u`` and ``r2 = (<w_j, u>^2)_j``.
    """

    def __init__(self, W: np.ndarray, seed: int):
        W = np.asarray(W, dtype=float)
        norms = np.linalg.norm(W, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-10:
            raise ValueError("all weight rows must be unit vectors")
        self.W = W
        self.seed = int(seed)
        self._projections: dict[bytes, tuple[np.ndarray, np.ndarray]] = {}

    @property
    def p(self) -> int:
        return self.W.shape[0]

    @property
    def d(self) -> int:
        return self.W.shape[1]

    def signal_projections(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        u = np.asarray(u, dtype=float)
        key = u.tobytes()
        if key not in self._projections:
            r1 = self.W @ u
            self._projections[key] = (r1, r1**2)
        return self._projections[key]


def sample_weights(d: int, p: int, seed: int) -> WeightEnsemble:
    """p independent rows, each a normalized standard Gaussian vector."""
    if d < 1 or p < 1:
        raise ValueError("need d >= 1 and p >= 1")
    G = make_rng(seed).standard_normal((p, d))
    W = G / np.linalg.norm(G, axis=1, keepdims=True)
    return WeightEnsemble(W, seed)


@dataclass(frozen=True)
class SampleBatch:
    """A generated dataset: features Z (p x n), latents F (m x n), labels y.

    ``d`` records the ambient input dimension for serialization.
    """

    Z: np.ndarray
    F: np.ndarray
    y: np.ndarray
    model_tag: str
    seed: int
    d: int

    def __post_init__(self):
        if self.model_tag not in MODEL_TAGS:
            raise ValueError(f"unknown model tag {self.model_tag!r}")
        n = self.Z.shape[1]
        if self.F.shape[1] != n or self.y.shape[0] != n:
            raise ValueError("Z, F, y column counts disagree")

    @property
    def n(self) -> int:
        return self.Z.shape[1]


def householder_to_e1(u: np.ndarray) -> np.ndarray:
    """Orthogonal Q with Q u = e_1 (Householder reflection)."""
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    v = u.copy()
    v[0] -= 1.0
    nv2 = v @ v
    if nv2 < 1e-30:
        return np.eye(u.shape[0])
    return np.eye(u.shape[0]) - 2.0 * np.outer(v, v) / nv2


# -- latent evaluation helpers ------------------------------------------------


def _eval_coordinate_on_x(coord: ChaosCoordinate, X: np.ndarray) -> np.ndarray:
    """Genuine chaos coordinate <beta, h_k(x)> on real inputs (columns of X)."""
    if coord.kind == "rank-one":
        return he(coord.order, coord.u @ X)
    return chaos_eval_batch(iota(coord.beta, coord.order, X.shape[0]), X)


def _order2_latent_from_m(coord: ChaosCoordinate, M: np.ndarray) -> np.ndarray:
    """<beta, g_2> read off the symmetric-matrix block M (d, d, c)."""
    if coord.kind == "rank-one":
        return np.einsum("i,ijc,j->c", coord.u, M, coord.u, optimize=True)
    B = iota(coord.beta, 2, M.shape[0]).entries
    return np.einsum("ij,ijc->c", B, M, optimize=True)


def _gram_factor(coords: list[ChaosCoordinate], d: int) -> np.ndarray:
    """PSD factor L with L L' = Gram(<beta_i, beta_j>) for one chaos order."""
    k = len(coords)
    C = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            C[i, j] = C[j, i] = coords[i].inner(coords[j], d)
    vals, vecs = np.linalg.eigh(C)
    if vals.min() < GRAM_PSD_TOL:
        raise ValueError(
            f"coordinate Gram matrix is not positive semidefinite "
            f"(min eigenvalue {vals.min():.3e})"
        )
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def _surrogate_high_order_rows(
    target: TargetSpec, d: int, n: int, rng: np.random.Generator
) -> dict[int, np.ndarray]:
    """Gaussian surrogates for latent orders >= 3, keyed by position in
    ``target.higher``; jointly drawn per order with Gram covariance."""
    rows: dict[int, np.ndarray] = {}
    for order in sorted({c.order for c in target.higher if c.order >= 3}):
        idx = [i for i, c in enumerate(target.higher) if c.order == order]
        L = _gram_factor([target.higher[i] for i in idx], d)
        draws = L @ rng.standard_normal((len(idx), n))
        for row, i in enumerate(idx):
            rows[i] = draws[row]
    return rows


def _quad_chunk_size(p: int, d: int, n: int) -> int:
    return max(1, min(n, _QUAD_CHUNK_BUDGET // max(1, p * d)))


def _quad_forms(W: np.ndarray, M: np.ndarray) -> np.ndarray:
    """(w_j' M_c w_j)_{j,c} for a stack M of shape (d, d, c)."""
    p, d = W.shape
    c = M.shape[2]
    tmp = (W @ M.reshape(d, d * c)).reshape(p, d, c)
    return np.einsum("jd,jdc->jc", W, tmp, optimize=True)


# -- samplers -----------------------------------------------------------------


def rf_batch(
    we: WeightEnsemble,
    target: TargetSpec,
    sigma: ActivationSpec,
    n: int,
    seed: int,
) -> SampleBatch:
    """Random-feature batch: Z = sigma(W X), latents evaluated on the same X."""
    rng = make_rng(seed)
    d = we.d
    X = rng.standard_normal((d, n))
    Z = sigma(we.W @ X)
    F = np.empty((target.m, n))
    F[: target.s] = X[: target.s]
    for i, coord in enumerate(target.higher):
        F[target.s + i] = _eval_coordinate_on_x(coord, X)
    eps = target.noise.draw(rng, n)
    y = target.link.labels(F, eps, rng)
    return SampleBatch(Z=Z, F=F, y=y, model_tag="RF", seed=seed, d=d)


def pge_batch(
    we: WeightEnsemble,
    target: TargetSpec,
    mu: HermiteCoeffs,
    n: int,
    seed: int,
) -> SampleBatch:
    """Partial Gaussian equivalent: chaos <= 2 exact, orders >= 3 Gaussian."""
    rng = make_rng(seed)
    d, p = we.d, we.p
    X = rng.standard_normal((d, n))
    WX = we.W @ X
    mu1 = mu.mu[1] if len(mu.mu) > 1 else 0.0
    mu2 = mu.mu[2] if len(mu.mu) > 2 else 0.0
    Z = mu.mu[0] + mu1 * WX
    if mu2 != 0.0:
        Z = Z + mu2 * he(2, WX)
    if mu.mu_gt2 != 0.0:
        Z = Z + mu.mu_gt2 * rng.standard_normal((p, n))
    high = _surrogate_high_order_rows(target, d, n, rng)
    F = np.empty((target.m, n))
    F[: target.s] = X[: target.s]
    for i, coord in enumerate(target.higher):
        if coord.order == 2:
            F[target.s + i] = _eval_coordinate_on_x(coord, X)
        else:
            F[target.s + i] = high[i]
    eps = target.noise.draw(rng, n)
    y = target.link.labels(F, eps, rng)
    return SampleBatch(Z=Z, F=F, y=y, model_tag="PGE", seed=seed, d=d)


def _gaussian_batch(
    we: WeightEnsemble,
    target: TargetSpec,
    mu: HermiteCoeffs,
    n: int,
    seed: int,
    conditional: bool,
) -> SampleBatch:
    """Shared GE / CGE sampler.

    GE (conditional=False) replaces every chaos block by independent
    Gaussians; CGE (conditional=True) keeps the x_S-dependent order-1/2
    feature terms exact and zeroes the support components of g_1, g_2 in
    the Gaussian part.  The draw order is identical in both branches, so
    at s = 0 they produce bitwise-equal batches for equal seeds.
    """
    rng = make_rng(seed)
    d, p = we.d, we.p
    W = we.W
    s = target.s if conditional else 0
    mu0 = mu.mu[0]
    mu1 = mu.mu[1] if len(mu.mu) > 1 else 0.0
    mu2 = mu.mu[2] if len(mu.mu) > 2 else 0.0

    X_S = rng.standard_normal((s, n))
    g1 = rng.standard_normal((d, n))
    g1_feat = g1
    if conditional and s:
        g1_feat = g1.copy()
        g1_feat[:s] = 0.0

    Z = np.full((p, n), mu0)
    Z += mu1 * (W @ g1_feat)
    if conditional and s:
        W_S = W[:, :s]
        G_S = W_S @ X_S
        row_norms2 = np.einsum("jk,jk->j", W_S, W_S)
        Z += mu1 * G_S
        if mu2 != 0.0:
            Z += mu2 * (G_S**2 - row_norms2[:, None]) / np.sqrt(2.0)

    order2_idx = [i for i, c in enumerate(target.higher) if c.order == 2]
    need_m = mu2 != 0.0 or bool(order2_idx)
    latent2 = {i: np.empty(n) for i in order2_idx}
    if need_m:
        chunk = _quad_chunk_size(p, d, n)
        for start in range(0, n, chunk):
            stop = min(n, start + chunk)
            A = rng.standard_normal((d, d, stop - start))
            M = 0.5 * (A + A.transpose(1, 0, 2))
            for i in order2_idx:
                latent2[i][start:stop] = _order2_latent_from_m(target.higher[i], M)
            if mu2 != 0.0:
                if conditional and s:
                    M[:s, :s, :] = 0.0
                Z[:, start:stop] += mu2 * _quad_forms(W, M)
    if mu.mu_gt2 != 0.0:
        Z += mu.mu_gt2 * rng.standard_normal((p, n))

    high = _surrogate_high_order_rows(target, d, n, rng)
    F = np.empty((target.m, n))
    F[: target.s] = X_S if conditional else g1[: target.s]
    for i, coord in enumerate(target.higher):
        F[target.s + i] = latent2[i] if coord.order == 2 else high[i]
    eps = target.noise.draw(rng, n)
    y = target.link.labels(F, eps, rng)
    tag = "CGE" if conditional else "GE"
    return SampleBatch(Z=Z, F=F, y=y, model_tag=tag, seed=seed, d=d)


def ge_batch_quadratic(
    we: WeightEnsemble,
    target: TargetSpec,
    mu: HermiteCoeffs,
    n: int,
    seed: int,
) -> SampleBatch:
    """Gaussian equivalent model in the quadratic scaling."""
    return _gaussian_batch(we, target, mu, n, seed, conditional=False)


def cge_batch(
    we: WeightEnsemble,
    target: TargetSpec,
    mu: HermiteCoeffs,
    n: int,
    seed: int,
) -> SampleBatch:
    """Conditional Gaussian equivalent model (canonical support x_1..x_s)."""
    return _gaussian_batch(we, target, mu, n, seed, conditional=True)


@dataclass(frozen=True)
class ModelSampler:
    """One of the four data models bound to a weight ensemble and target."""

    model_tag: str
    we: WeightEnsemble
    target: TargetSpec
    sigma: ActivationSpec
    mu: HermiteCoeffs = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.model_tag not in MODEL_TAGS:
            raise ValueError(f"unknown model tag {self.model_tag!r}")
        if self.mu is None:
            from .hermite import hermite_coeffs

            object.__setattr__(self, "mu", hermite_coeffs(self.sigma))

    def sample(self, n: int, seed: int) -> SampleBatch:
        if self.model_tag == "RF":
            return rf_batch(self.we, self.target, self.sigma, n, seed)
        if self.model_tag == "PGE":
            return pge_batch(self.we, self.target, self.mu, n, seed)
        if self.model_tag == "GE":
            return ge_batch_quadratic(self.we, self.target, self.mu, n, seed)
        return cge_batch(self.we, self.target, self.mu, n, seed)


# -- batch serialization ------------------------------------------------------

_CSV_FMT = "%.17g"


def save_batch_csv(batch: SampleBatch, path: str) -> None:
    """CSV layout: one header line ``model_tag,d,p,n,m,seed`` followed by
    the p rows of Z, the m rows of F and one row of y, all row-major."""
    p, n = batch.Z.shape
    m = batch.F.shape[0]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{batch.model_tag},{batch.d},{p},{n},{m},{batch.seed}\n")
        for block in (batch.Z, batch.F, batch.y.reshape(1, -1)):
            for row in block:
                fh.write(",".join(_CSV_FMT % v for v in row) + "\n")


def load_batch_csv(path: str) -> SampleBatch:
    with open(path, "r", encoding="utf-8") as fh:
        tag, p, n, m, seed = fh.readline().strip().split(",")
        p, n, m, seed = int(p), int(n), int(m), int(seed)
        data = np.loadtxt(io.StringIO(fh.read()), delimiter=",", ndmin=2)
    Z = data[:p]
    F = data[p : p + m].reshape(m, n)
    y = data[p + m]
    return SampleBatch(Z=Z, F=F, y=y, model_tag=tag, seed=seed, d=d)
