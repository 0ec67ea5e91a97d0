"""Sparse PCA by l1-proximal iterations on the variance objective.

The smooth part is ``g(x) = -x^T D^T D x`` with gradient ``-2 D^T D x``; the
non-smooth part is ``lambda * ||x||_1`` whose prox is soft thresholding at
``lambda * t``. Three update schemes are provided:

* ISTA: ``x+ = prox((I + 2t D^T D) x)``
* coarse Runge-Kutta: two gradient stages, then prox
* classical RK4 on the gradient flow ``dx/dt = -grad g(x)``, then prox

``D^T D`` is never formed; every gradient is two matrix-vector products.
"""
from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidInputError, OverShrinkageError

POWER_STEPS_FOR_STEP_SIZE = 50


class Method(str, enum.Enum):
    ISTA = "ista"
    RK_COARSE = "rk2"
    RK4 = "rk4"
    PCA_BASELINE = "pca"

    @property
    def grads_per_step(self):
        return {Method.ISTA: 1, Method.RK_COARSE: 2, Method.RK4: 4, Method.PCA_BASELINE: 0}[self]


@dataclass(frozen=True)
class SolverConfig:
    """Iteration settings.

    ``step_t=None`` means "derive from the data" (see :func:`default_step`).
    The l1 threshold applied per iteration is ``lam * step_t``.
    """

    method: Method = Method.ISTA
    step_t: float | None = None
    lam: float = 0.1
    max_iters: int = 500
    tol: float = 1e-6
    seed: int = 0
    normalize_each_iter: bool = True

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if self.step_t is not None and not self.step_t > 0:
            raise InvalidInputError(f"step_t must be > 0, got {self.step_t}")
        if not self.lam >= 0:
            raise InvalidInputError(f"lambda must be >= 0, got {self.lam}")
        if not self.tol >= 0:
            raise InvalidInputError(f"tol must be >= 0, got {self.tol}")
        if int(self.max_iters) < 1:
            raise InvalidInputError(f"max_iters must be >= 1, got {self.max_iters}")


@dataclass(frozen=True)
class LoadingVector:
    values: np.ndarray

    @property
    def nnz(self):
        return int(np.count_nonzero(self.values))

    @property
    def p(self):
        return self.values.shape[0]


@dataclass(frozen=True)
class ComponentBasis:
    """p x d matrix of loading vectors stored column-wise."""

    matrix: np.ndarray

    def __post_init__(self):
        V = np.array(self.matrix, dtype=float)
        if V.ndim != 2 or V.shape[1] < 1:
            raise InvalidInputError(f"basis must be p x d with d >= 1, got shape {V.shape}")
        V.setflags(write=False)
        object.__setattr__(self, "matrix", V)

    @classmethod
    def from_columns(cls, columns):
        return cls(np.column_stack([np.asarray(getattr(c, "values", c), dtype=float) for c in columns]))

    @property
    def p(self):
        return self.matrix.shape[0]

    @property
    def d(self):
        return self.matrix.shape[1]

    @property
    def columns(self):
        return [LoadingVector(self.matrix[:, j].copy()) for j in range(self.d)]


@dataclass
class SolveTrace:
    iterations_used: int = 0
    gradient_evals: int = 0
    final_delta: float = 0.0
    wall_seconds: float = 0.0
    component_iterations: list = field(default_factory=list)


def _check_dims(D, x):
    D = np.asarray(D, dtype=float)
    x = np.asarray(x, dtype=float)
    if D.ndim != 2:
        raise InvalidInputError(f"D must be 2-D, got shape {D.shape}")
    if x.shape != (D.shape[1],):
        raise InvalidInputError(f"x has shape {x.shape}, D has {D.shape[1]} columns")
    return D, x


def g_value(D, x):
    D, x = _check_dims(D, x)
    Dx = D @ x
    return -float(Dx @ Dx)


def objective(D, x, lam):
    """Diagnostic value of ``g(x) + lam * ||x||_1``."""
    return g_value(D, x) + lam * float(np.abs(x).sum())


def grad_g(D, x):
    D, x = _check_dims(D, x)
    return -2.0 * (D.T @ (D @ x))


def soft_threshold(v, theta):
    if theta < 0:
        raise InvalidInputError(f"threshold must be >= 0, got {theta}")
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - theta, 0.0)


def ista_step(D, x, t, lam, grad=grad_g):
    x = np.asarray(x, dtype=float)
    return soft_threshold(x - t * grad(D, x), lam * t)


def rk_coarse_step(D, x, t, grad=grad_g):
    x = np.asarray(x, dtype=float)
    x_half = x - t * grad(D, x)
    return x - t * grad(D, x_half)


def rk4_step(D, x, t, grad=grad_g):
    x = np.asarray(x, dtype=float)
    s1 = -grad(D, x)
    s2 = -grad(D, x + t * s1 / 2)
    s3 = -grad(D, x + t * s2 / 2)
    s4 = -grad(D, x + t * s3)
    return x + (t / 6) * (s1 + 2 * s2 + 2 * s3 + s4)


def sparse_rk_update(D, x, t, lam, order="coarse", grad=grad_g):
    if order in ("coarse", Method.RK_COARSE):
        y = rk_coarse_step(D, x, t, grad)
    elif order in ("fourth", Method.RK4):
        y = rk4_step(D, x, t, grad)
    else:
        raise InvalidInputError(f"unknown Runge-Kutta order {order!r}")
    return soft_threshold(y, lam * t)


def initial_vector(p, seed):
    """Seeded random unit vector, uniform on the sphere."""
    x = np.random.default_rng(seed).standard_normal(p)
    return x / np.linalg.norm(x)


def largest_eigenvalue(D, steps=POWER_STEPS_FOR_STEP_SIZE, seed=0):
    """Power-iteration estimate of sigma_max(D)^2."""
    D = np.asarray(D, dtype=float)
    x = initial_vector(D.shape[1], seed)
    est = 0.0
    for _ in range(steps):
        y = D.T @ (D @ x)
        est = float(np.linalg.norm(y))
        if est == 0.0:
            return 0.0
        x = y / est
    return est


def default_step(D, seed=0):
    """t = 1 / (2 sigma_max(D)^2)."""
    s2 = largest_eigenvalue(D, seed=seed)
    if s2 <= 0.0:
        raise InvalidInputError("cannot derive a step size from an all-zero data matrix")
    return 1.0 / (2.0 * s2)


def _resolve_step(D, cfg):
    return cfg.step_t if cfg.step_t is not None else default_step(D, cfg.seed)


def solve_component(D, cfg: SolverConfig, x0=None):
    """Iterate the configured update from a seeded start until the iterate
    change drops below ``cfg.tol`` or ``cfg.max_iters`` is reached.

    Returns ``(LoadingVector, SolveTrace)``. Raises OverShrinkageError if the
    prox zeroes the iterate.
    """
    D = np.asarray(D, dtype=float)
    if cfg.method is Method.PCA_BASELINE:
        raise InvalidInputError("solve_component needs a sparse method; use fit_pca for the baseline")
    t = _resolve_step(D, cfg)
    lam_t = cfg.lam * t
    x = initial_vector(D.shape[1], cfg.seed) if x0 is None else np.asarray(x0, dtype=float)
    _check_dims(D, x)

    evals = 0

    def counted_grad(D_, v):
        nonlocal evals
        evals += 1
        return grad_g(D_, v)

    if cfg.method is Method.ISTA:
        def update(v):
            return ista_step(D, v, t, cfg.lam, counted_grad)
    else:
        def update(v):
            return sparse_rk_update(D, v, t, cfg.lam, cfg.method, counted_grad)

    start = time.perf_counter()
    delta = float("inf")
    k = 0
    for k in range(1, cfg.max_iters + 1):
        x_new = update(x)
        norm = np.linalg.norm(x_new)
        if norm == 0.0:
            raise OverShrinkageError(lam_t, k)
        if cfg.normalize_each_iter:
            x_new = x_new / norm
        delta = float(np.linalg.norm(x_new - x))
        x = x_new
        if delta < cfg.tol:
            break
    elapsed = time.perf_counter() - start

    trace = SolveTrace(k, evals, delta, elapsed, [k])
    return LoadingVector(x), trace


def deflate(D, v):
    """Projection deflation ``D (I - v v^T)``."""
    D, v = _check_dims(D, v)
    if abs(np.linalg.norm(v) - 1.0) > 1e-8:
        raise InvalidInputError(f"deflation vector must be unit norm, got norm {np.linalg.norm(v):.3g}")
    return D - np.outer(D @ v, v)


def fit_sparse_pca(D, d, cfg: SolverConfig):
    """Extract ``d`` sparse loadings by solve-then-deflate.

    The step size is fixed once from the undeflated matrix so that later,
    nearly exhausted deflations still get a finite step. Each component uses
    seed ``cfg.seed + j`` for its start vector. Stored columns are unit norm.
    """
    D = np.asarray(D, dtype=float)
    p = D.shape[1]
    if not 1 <= d <= p:
        raise InvalidInputError(f"d must lie in [1, {p}], got {d}")
    base = replace(cfg, step_t=_resolve_step(D, cfg))

    total = SolveTrace()
    cols = []
    current = D
    for j in range(d):
        try:
            vec, tr = solve_component(current, replace(base, seed=cfg.seed + j))
        except OverShrinkageError as exc:
            raise exc.with_component(j) from exc
        v = vec.values / np.linalg.norm(vec.values)
        cols.append(v)
        current = deflate(current, v)
        total.iterations_used += tr.iterations_used
        total.gradient_evals += tr.gradient_evals
        total.wall_seconds += tr.wall_seconds
        total.final_delta = max(total.final_delta, tr.final_delta)
        total.component_iterations.append(tr.iterations_used)
    return ComponentBasis.from_columns(cols), total


def _fix_signs(V):
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def fit_pca(D, d):
    """Top-d right singular vectors of D, largest-magnitude entry positive."""
    D = np.asarray(D, dtype=float)
    n, p = D.shape
    if not 1 <= d <= p:
        raise InvalidInputError(f"d must lie in [1, {p}], got {d}")
    # d beyond the thin SVD's rank needs the full right basis
    _, _, Vt = np.linalg.svd(D, full_matrices=d > min(n, p))
    return ComponentBasis(_fix_signs(Vt[:d].T))


def project(X, basis: ComponentBasis):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != basis.p:
        raise InvalidInputError(f"X has shape {X.shape}, basis expects {basis.p} features")
    return X @ basis.matrix
