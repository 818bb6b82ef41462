"""Spectral gaps, least-eigenvalue margins, and boundary gap profiles.

Dense diagonalization below a size cutoff, implicitly restarted Lanczos
(ARPACK) above it. Iterative results carry an explicit residual check so a
silently unconverged eigenvalue cannot masquerade as a gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .operators import ChainModel, LocalProjector, SparseHermitianOperator, chain_hamiltonian

DENSE_CUTOFF = 2048
DENSE_FALLBACK_CUTOFF = 8192
PSD_DENSE_CUTOFF = 4096
RESIDUAL_RTOL = 1e-8
MAX_SWEEP_K = 64
_ARPACK_MAXITER = 5000


@dataclass(frozen=True)
class GapReport:
    """Result of a gap computation.

    ``gap`` is the smallest eigenvalue above the kernel threshold
    zero_tol * max(1, lambda_max), or +inf when no eigenvalue exceeds it
    (zero operator). ``residual`` is the relative eigenpair residual of the
    gap eigenvalue (0 for dense computations).
    """

    dim: int
    ground_energy: float
    kernel_dim: int
    gap: float
    method: str
    zero_tol: float
    residual: float


@dataclass(frozen=True)
class GapProfile:
    """Open-boundary gap data of a chain model at window size n.

    ``bulk`` is the bulk gap at n sites; ``bulk_list``, ``left`` and
    ``right`` collect the bulk / left-boundary / right-boundary gaps for
    all lengths n' = 2..n (index 0 is n' = 2). ``edge_min`` is the
    boundary gap min(1, min over n' <= n of left and right gaps).
    """

    n: int
    bulk: float
    left: tuple[float, ...]
    right: tuple[float, ...]
    edge_min: float
    bulk_list: tuple[float, ...]
    boundary_trivial: bool

    def edge_min_at(self, k: int) -> float:
        """The boundary gap restricted to lengths n' <= k (1 when k < 2)."""
        if k < 1:
            raise ValueError(f"need k >= 1, got {k}")
        count = min(k - 1, len(self.left))
        values = self.left[:count] + self.right[:count]
        return min(1.0, min(values)) if values else 1.0

    def bulk_min_at(self, k: int) -> float:
        """min over 2 <= n' <= k of the bulk gaps (+inf when k < 2)."""
        if k < 1:
            raise ValueError(f"need k >= 1, got {k}")
        values = self.bulk_list[: min(k - 1, len(self.bulk_list))]
        return min(values) if values else math.inf


# ---------------------------------------------------------------------------
# input normalization
# ---------------------------------------------------------------------------

def _normalize(op):
    """Return (apply, eigsh_target, dim, dense_array_or_None)."""
    if isinstance(op, SparseHermitianOperator):
        op = op.matrix
    if isinstance(op, LinearOperator):
        if op.shape[0] != op.shape[1]:
            raise ValueError("operator must be square")
        return op.matvec, op, op.shape[0], None
    if sp.issparse(op):
        mat = sp.csr_matrix(op)
        return (lambda v: mat @ v), mat, mat.shape[0], None
    arr = np.asarray(op)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("operator must be a square matrix")
    return (lambda v: arr @ v), arr, arr.shape[0], arr


def _densify(target, dim):
    if isinstance(target, LinearOperator):
        return None
    if sp.issparse(target):
        return target.toarray() if dim <= DENSE_FALLBACK_CUTOFF else None
    return np.asarray(target)


def _eigsh(target, **kw):
    try:
        return eigsh(target, **kw)
    except ArpackNoConvergence as err:
        raise RuntimeError(
            f"Lanczos iteration did not converge within {_ARPACK_MAXITER} restarts: {err}"
        ) from err


def _largest_eigenvalue(target, dim) -> float:
    vals = _eigsh(
        target, k=1, which="LA", return_eigenvectors=False, maxiter=_ARPACK_MAXITER
    )
    return float(vals[0])


# ---------------------------------------------------------------------------
# gaps
# ---------------------------------------------------------------------------

def _dense_report(arr: np.ndarray, zero_tol: float) -> GapReport:
    dim = arr.shape[0]
    vals = np.linalg.eigvalsh(arr)
    lam_max = float(vals[-1]) if dim else 0.0
    scale = max(1.0, lam_max)
    threshold = zero_tol * scale
    above = vals > threshold
    gap = float(vals[above].min()) if above.any() else math.inf
    return GapReport(
        dim=dim,
        ground_energy=float(vals[0]),
        kernel_dim=int((~above).sum()),
        gap=gap,
        method="dense",
        zero_tol=zero_tol,
        residual=0.0,
    )


def spectral_gap(op, zero_tol: float = 1e-10, method: str | None = None) -> GapReport:
    """Ground energy, kernel dimension, and spectral gap of a PSD operator.

    The gap is the smallest eigenvalue exceeding zero_tol * max(1,
    lambda_max). ``method`` may force "dense" or "iterative"; by default
    dense diagonalization is used up to dimension 2048. Iterative runs
    raise if the residual of the gap eigenpair exceeds 1e-8 relative to
    the spectral scale.
    """
    apply, target, dim, arr = _normalize(op)
    if method not in (None, "dense", "iterative"):
        raise ValueError(f"unknown method {method!r}")
    if method is None:
        method = "dense" if (dim <= DENSE_CUTOFF and not isinstance(target, LinearOperator)) else "iterative"
    if method == "dense":
        if arr is None:
            arr = _densify(target, dim)
        if arr is None:
            raise ValueError("dense method requested for an operator that cannot be densified")
        return _dense_report(arr, zero_tol)

    if sp.issparse(target) and target.nnz == 0:
        return GapReport(dim, 0.0, dim, math.inf, "iterative", zero_tol, 0.0)

    lam_max = _largest_eigenvalue(target, dim)
    scale = max(1.0, lam_max)
    threshold = zero_tol * scale

    k = 8
    while True:
        k_eff = min(k, dim - 1)
        vals, vecs = _eigsh(target, k=k_eff, which="SA", maxiter=_ARPACK_MAXITER)
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
        above = vals > threshold
        if above.any():
            break
        if k_eff >= min(MAX_SWEEP_K, dim - 1):
            arr = _densify(target, dim)
            if arr is not None:
                return _dense_report(arr, zero_tol)
            raise RuntimeError(
                f"kernel sweep exhausted at k={k_eff} without finding a positive "
                "eigenvalue; the kernel is too large for the iterative path"
            )
        k *= 2

    idx = int(np.nonzero(above)[0][0])
    gap = float(vals[idx])
    v = vecs[:, idx]
    residual = float(np.linalg.norm(apply(v) - gap * v)) / scale
    if residual > RESIDUAL_RTOL:
        raise RuntimeError(f"gap eigenpair residual {residual:.3e} exceeds {RESIDUAL_RTOL}")
    return GapReport(
        dim=dim,
        ground_energy=float(vals[0]),
        kernel_dim=idx,
        gap=gap,
        method="iterative",
        zero_tol=zero_tol,
        residual=residual,
    )


def psd_margin(
    op,
    method: str | None = None,
    tol: float = 0.0,
    scale: float | None = None,
    v0: np.ndarray | None = None,
) -> float:
    """The least eigenvalue of a Hermitian operator.

    Certifies inequalities X >= Y by psd_margin(X - Y) >= -tolerance.
    Dense up to dimension 4096 (always for ndarray input); matrix-free
    operators use Lanczos with an explicit residual check. ``tol`` is the
    Lanczos eigenvalue tolerance (0 = machine), ``scale`` the spectral
    scale used for the residual check (estimated when omitted), and ``v0``
    a deterministic start vector.
    """
    apply, target, dim, arr = _normalize(op)
    if method not in (None, "dense", "iterative"):
        raise ValueError(f"unknown method {method!r}")
    if method is None:
        if arr is not None or (dim <= PSD_DENSE_CUTOFF and not isinstance(target, LinearOperator)):
            method = "dense"
        else:
            method = "iterative"
    if method == "dense":
        if arr is None:
            arr = _densify(target, dim)
        if arr is None:
            raise ValueError("dense method requested for an operator that cannot be densified")
        return float(np.linalg.eigvalsh(arr)[0])

    vals, vecs = _eigsh(target, k=1, which="SA", maxiter=_ARPACK_MAXITER, tol=tol, v0=v0)
    theta = float(vals[0])
    v = vecs[:, 0]
    if scale is None:
        scale = abs(
            float(
                _eigsh(
                    target,
                    k=1,
                    which="LM",
                    return_eigenvectors=False,
                    maxiter=_ARPACK_MAXITER,
                    v0=v0,
                )[0]
            )
        )
    scale = max(1.0, float(scale), abs(theta))
    residual = float(np.linalg.norm(apply(v) - theta * v)) / scale
    if residual > max(RESIDUAL_RTOL, 10.0 * tol):
        raise RuntimeError(f"margin eigenpair residual {residual:.3e} exceeds tolerance")
    return theta


# ---------------------------------------------------------------------------
# boundary gap profiles
# ---------------------------------------------------------------------------

def gap_profile(model: ChainModel, n: int, zero_tol: float = 1e-10) -> GapProfile:
    """Bulk and boundary gaps of an open chain model for lengths 2..n.

    The bulk gap drops both boundary projectors; the left (right) gap
    keeps only the left (right) one. For models without boundary
    projectors all three families coincide.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if model.bc != "open":
        raise ValueError("gap profiles are defined for open chains")
    zero = LocalProjector.zero(1, model.d)
    bulk_model = ChainModel(model.d, model.P, zero, zero)
    left_model = ChainModel(model.d, model.P, model.P_L, zero)
    right_model = ChainModel(model.d, model.P, zero, model.P_R)

    def gaps(chain: ChainModel) -> tuple[float, ...]:
        return tuple(
            spectral_gap(chain_hamiltonian(chain, length), zero_tol=zero_tol).gap
            for length in range(2, n + 1)
        )

    bulk_list = gaps(bulk_model)
    left = bulk_list if model.P_L.is_zero else gaps(left_model)
    right = bulk_list if model.P_R.is_zero else gaps(right_model)
    return GapProfile(
        n=n,
        bulk=bulk_list[-1],
        left=left,
        right=right,
        edge_min=min(1.0, min(left + right)),
        bulk_list=bulk_list,
        boundary_trivial=model.boundary_trivial,
    )
