"""Planes of the Grassmannian G(d, n): orthonormal frames, projectors,
a plane metric, and the small dense symmetric eigensolver that every
subspace fit in this package reduces to.

A plane is stored as a row-orthonormal d x n frame plus its cached n x n
orthogonal projector.  All minimizations over G(d, n) elsewhere in the
package come down to :func:`principal_subspace` of a symmetric matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import NumericError, ValidationError

# Orthonormality of frames and projector identities are enforced to this
# absolute tolerance at construction.
ORTHO_TOL = 1e-12
# Relative residual below which an input frame vector counts as dependent.
RANK_TOL = 1e-10
# Jacobi sweeps stop once the off-diagonal Frobenius norm drops below
# JACOBI_TOL times the Frobenius norm of the input.
JACOBI_TOL = 1e-12
_MAX_JACOBI_SWEEPS = 100
# Relative spectral gap under which the cut between kept and dropped
# eigenvalues is reported as a tie.
TIE_REL_GAP = 1e-6


def symmetrize(m: np.ndarray) -> np.ndarray:
    """Mirror the upper triangle down so the result is bitwise symmetric."""
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    return np.triu(a) + np.triu(a, 1).T


@dataclass(frozen=True, eq=False)
class Plane:
    """A d-dimensional linear subspace of R^n.

    Attributes
    ----------
    basis : (d, n) ndarray
        Rows form an orthonormal frame spanning the plane.
    projector : (n, n) ndarray
        Cached orthogonal projector onto the plane (symmetric, idempotent,
        trace d).  Built from the basis at construction.
    """

    basis: np.ndarray
    projector: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        b = np.array(self.basis, dtype=float, copy=True)
        if b.ndim == 1:
            b = b[np.newaxis, :]
        if b.ndim != 2:
            raise ValidationError(f"basis must be a d x n array, got ndim={b.ndim}")
        d, n = b.shape
        if not 1 <= d < n:
            raise ValidationError(f"plane dimension must satisfy 1 <= d < n, got d={d}, n={n}")
        gram = b @ b.T
        if np.max(np.abs(gram - np.eye(d))) > ORTHO_TOL:
            raise ValidationError("basis rows are not orthonormal to 1e-12; use plane_from_basis")
        proj = symmetrize(b.T @ b)
        b.setflags(write=False)
        proj.setflags(write=False)
        object.__setattr__(self, "basis", b)
        object.__setattr__(self, "projector", proj)

    @property
    def n(self) -> int:
        return self.basis.shape[1]

    @property
    def d(self) -> int:
        return self.basis.shape[0]

    def __repr__(self) -> str:  # keep array noise out of logs
        return f"Plane(d={self.d}, n={self.n})"


class SubspaceResult(NamedTuple):
    """Outcome of a principal-subspace extraction.

    ``degenerate`` is set when the spectral gap at the cut (lambda_d minus
    lambda_{d+1}) is below ``TIE_REL_GAP`` times the spectral radius, i.e.
    the reported plane was picked by the deterministic sweep-order
    tie-break and is not a meaningful unique minimizer.
    """

    plane: Plane
    eigenvalues: np.ndarray
    degenerate: bool


def plane_from_basis(vectors: Sequence[Sequence[float]] | np.ndarray) -> Plane:
    """Build a plane from d spanning vectors in R^n.

    The vectors are orthonormalized by modified Gram-Schmidt with a second
    re-orthogonalization pass.  A vector whose residual after projection
    falls below ``RANK_TOL`` relative to its own norm makes the frame
    rank-deficient.

    Raises
    ------
    NumericError
        If the input vectors are (numerically) linearly dependent; the
        message reports the numerical rank found.
    """
    arr = np.atleast_2d(np.asarray(vectors, dtype=float))
    d, n = arr.shape
    if not 1 <= d < n:
        raise ValidationError(f"need 1 <= d < n vectors in R^n, got d={d}, n={n}")
    rows: list[np.ndarray] = []
    for i in range(d):
        v = arr[i].copy()
        scale = float(np.linalg.norm(arr[i]))
        for _ in range(2):  # second pass stabilizes nearly dependent input
            for b in rows:
                v -= (v @ b) * b
        res = float(np.linalg.norm(v))
        if scale == 0.0 or res <= RANK_TOL * scale:
            raise NumericError(
                f"degenerate frame: numerical rank {len(rows)} < {d} "
                f"(vector {i} has relative residual {0.0 if scale == 0.0 else res / scale:.2e}, "
                f"threshold {RANK_TOL:g})"
            )
        rows.append(v / res)
    return Plane(np.array(rows))


def dist_point_to_plane(p: Plane, v: Sequence[float] | np.ndarray) -> float:
    """Distance from a vector to the plane: |v - proj(v)|."""
    w = np.asarray(v, dtype=float)
    if w.shape != (p.n,):
        raise ValidationError(f"vector shape {w.shape} does not match ambient dimension {p.n}")
    resid = w - p.basis.T @ (p.basis @ w)
    return float(np.linalg.norm(resid))


def plane_dist(p: Plane, q: Plane, *, norm: str = "fro") -> float:
    """Distance between two planes as a norm of the projector difference.

    Frobenius by default; ``norm="op"`` gives the operator (spectral) norm
    variant, kept for comparison only.
    """
    if (p.d, p.n) != (q.d, q.n):
        raise ValidationError(f"plane shape mismatch: ({p.d},{p.n}) vs ({q.d},{q.n})")
    diff = p.projector - q.projector
    if norm == "fro":
        return float(np.linalg.norm(diff))
    if norm == "op":
        return float(np.linalg.norm(diff, 2))
    raise ValidationError(f"unknown norm {norm!r}; expected 'fro' or 'op'")


def _jacobi_eigh(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalization of a symmetric matrix.

    Returns (eigenvalues, eigenvectors-as-columns), unsorted.  Sweeps run
    in fixed (p, q) lexicographic order, which is what makes the tie-break
    of equal eigenvalues deterministic.
    """
    a = np.array(m, dtype=float, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    scale = float(np.linalg.norm(a))
    if scale == 0.0:
        return np.zeros(n), v
    tol = JACOBI_TOL * scale
    for _ in range(_MAX_JACOBI_SWEEPS):
        off = float(np.sqrt(np.sum(np.square(a - np.diag(np.diag(a))))))
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                diff = a[q, q] - a[p, p]
                if diff == 0.0:
                    t = 1.0
                else:
                    tau = diff / (2.0 * apq)
                    t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                # A <- G^T A G with the Givens rotation G in the (p, q) plane.
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise NumericError("jacobi eigensolver failed to converge")
    return np.diag(a).copy(), v


def principal_subspace(m: np.ndarray, d: int) -> SubspaceResult:
    """Dominant d-dimensional eigenspace of a symmetric matrix.

    The returned plane spans the eigenvectors of the d largest
    eigenvalues; eigenvalues come back sorted descending.  Equal
    eigenvalues are resolved deterministically by the Jacobi sweep order
    and flagged through ``degenerate``.
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if not 1 <= d < n:
        raise ValidationError(f"need 1 <= d < n, got d={d}, n={n}")
    scale = float(np.linalg.norm(a))
    if scale > 0.0 and np.max(np.abs(a - a.T)) > 1e-12 * scale:
        raise ValidationError("matrix is not symmetric")
    vals, vecs = _jacobi_eigh(symmetrize(a))
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    spectral = max(abs(float(vals[0])), abs(float(vals[-1])))
    gap = float(vals[d - 1] - vals[d])
    degenerate = gap <= TIE_REL_GAP * max(spectral, np.finfo(float).tiny)
    plane = Plane(vecs[:, :d].T.copy())
    return SubspaceResult(plane, vals, degenerate)


def mean_plane(entries: Sequence[tuple[Plane, float]]) -> Plane:
    """Weighted Frobenius mean of planes.

    Minimizes ``sum_j w_j * |proj(P) - proj(P_j)|_F^2`` over G(d, n); the
    minimizer is exactly the dominant d-subspace of the weighted mean
    projector, so this reduces to one eigenproblem.
    """
    if len(entries) == 0:
        raise ValidationError("mean_plane needs at least one (plane, weight) entry")
    d, n = entries[0][0].d, entries[0][0].n
    acc = np.zeros((n, n))
    total = 0.0
    for plane, w in entries:
        if (plane.d, plane.n) != (d, n):
            raise ValidationError("all planes must share the same (d, n)")
        w = float(w)
        if w < 0.0 or not np.isfinite(w):
            raise ValidationError(f"weights must be finite and >= 0, got {w}")
        acc += w * plane.projector
        total += w
    if total <= 0.0:
        raise NumericError("empty cell: all weights are zero")
    return principal_subspace(symmetrize(acc / total), d).plane
