"""Tangent-plane estimation by energy minimization over G(d, n).

For atomic measures the scale-averaged height excess at a point x is,
as a function of the plane P,

    E(x, P) = trace(M) - trace(proj_P M),
    M = sum_j m_j W(|y_j - x|) (y_j - x)(y_j - x)^T,

so the minimizer over G(d, n) is exactly the dominant d-eigenspace of the
weighted second-moment matrix M: the estimator is one eigenproblem per
point, deterministic, and globally optimal (no descent, no local minima).
A sampled grid-search oracle is kept for independent verification of that
optimality.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .atomic import AtomicVarifold
from .energy import EnergyParams, _check_point, _window_mask
from .errors import NumericError, ValidationError, VarifoldError
from .grassmann import Plane, plane_from_basis, principal_subspace

# Relative spectral gap below which an estimate is flagged non-unique.
DEGENERATE_REL_GAP = 1e-6
ORACLE_MIN_SAMPLES = 16
_ORACLE_SHAPES = {(1, 2), (1, 3), (2, 3)}


@dataclass(frozen=True)
class TangentEstimate:
    """Minimizing plane with its energy and the spectrum behind it.

    ``energy`` is the residual spectrum sum trace(M) - sum of the top d
    eigenvalues (equal to the energy at the returned plane);
    ``spectral_gap`` is lambda_d - lambda_{d+1}; ``degenerate`` flags a
    vanishing relative gap, i.e. the minimizer is not unique and the
    returned plane is the deterministic tie-break.
    """

    plane: Plane
    energy: float
    eigenvalues: np.ndarray
    spectral_gap: float
    degenerate: bool


@dataclass(frozen=True)
class TangentFieldEntry:
    """Per-point outcome of a field evaluation: an estimate or an error note."""

    point: tuple[float, ...]
    estimate: TangentEstimate | None
    error: str | None


def moment_matrix(x, v: AtomicVarifold, params: EnergyParams) -> np.ndarray:
    """Weighted second-moment matrix M of the atoms around x (positive
    semidefinite, exactly symmetric)."""
    c = _check_point(x, v, params)
    mask = _window_mask(v, params)
    points, masses = v.points, v.masses
    if mask is not None:
        points, masses = points[mask], masses[mask]
    return np.asarray(_backend.kernels().weighted_moment(
        points, masses, c, v.d, params.alpha, params.r_max))


def estimate_tangent(x, v: AtomicVarifold, params: EnergyParams) -> TangentEstimate:
    """Energy-minimizing plane at x: dominant d-eigenspace of the moment
    matrix, with energy from the trace identity.

    Raises
    ------
    NumericError
        If the moment matrix vanishes ("no local data"): no atom carries
        weight at scale r_max around x.
    """
    m = moment_matrix(x, v, params)
    if not np.any(m):
        raise NumericError(
            f"no local data: point {tuple(np.asarray(x, float))} is isolated at scale "
            f"r_max={params.r_max}")
    plane, eigenvalues, _ = principal_subspace(m, v.d)
    residual = float(np.sum(eigenvalues[v.d:]))
    gap = float(eigenvalues[v.d - 1] - eigenvalues[v.d])
    degenerate = gap < DEGENERATE_REL_GAP * max(float(eigenvalues[0]), np.finfo(float).tiny)
    return TangentEstimate(
        plane=plane,
        energy=max(residual, 0.0),
        eigenvalues=eigenvalues,
        spectral_gap=gap,
        degenerate=degenerate,
    )


def _fibonacci_directions(k: int) -> np.ndarray:
    """k near-uniform unit directions on S^2 (golden-angle spiral)."""
    i = np.arange(k) + 0.5
    z = 1.0 - 2.0 * i / k
    radius = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = i * np.pi * (3.0 - np.sqrt(5.0))
    return np.column_stack([radius * np.cos(phi), radius * np.sin(phi), z])


def _complement_plane(normal: np.ndarray) -> Plane:
    """Orthogonal complement of a unit vector in R^3, built deterministically."""
    rows = []
    for a in range(3):
        e = np.zeros(3)
        e[a] = 1.0
        w = e - (e @ normal) * normal
        for b in rows:
            w -= (w @ b) * b
        norm = float(np.linalg.norm(w))
        if norm > 1e-6:
            rows.append(w / norm)
        if len(rows) == 2:
            break
    return plane_from_basis(np.array(rows))


def grid_search_oracle(x, v: AtomicVarifold, params: EnergyParams,
                       k: int) -> tuple[Plane, float]:
    """Best plane among k sampled candidates by direct energy evaluation.

    Supports G(1,2) (uniform angle sweep), G(1,3) and G(2,3)
    (Fibonacci-sphere directions, planes being the spans respectively the
    complements).  Ties resolve to the first sampled minimizer.  This is
    the independent check of :func:`estimate_tangent`: it never touches
    the moment matrix.
    """
    if (v.d, v.n) not in _ORACLE_SHAPES:
        raise ValidationError(
            f"grid search supports (d, n) in {sorted(_ORACLE_SHAPES)}, got ({v.d}, {v.n})")
    if k < ORACLE_MIN_SAMPLES:
        raise ValidationError(f"k must be >= {ORACLE_MIN_SAMPLES}, got {k}")
    c = _check_point(x, v, params)
    mask = _window_mask(v, params)
    points, masses = v.points, v.masses
    if mask is not None:
        points, masses = points[mask], masses[mask]
    diff = points - c
    rho2 = np.einsum("ij,ij->i", diff, diff)
    from . import _kernels_numpy

    weights = masses * _kernels_numpy.weight_values(
        np.sqrt(rho2), params.alpha, params.r_max, v.d)
    if v.n == 2:
        theta = np.pi * np.arange(k) / k
        candidates = np.column_stack([np.cos(theta), np.sin(theta)])
    else:
        candidates = _fibonacci_directions(k)
    along = diff @ candidates.T  # (N, k) components along each direction
    if (v.d, v.n) == (2, 3):
        dist2 = along**2  # distance to the complement plane of the direction
    else:
        dist2 = np.maximum(rho2[:, np.newaxis] - along**2, 0.0)
    values = weights @ dist2
    best = int(np.argmin(values))
    if (v.d, v.n) == (2, 3):
        plane = _complement_plane(candidates[best])
    else:
        plane = Plane(candidates[best][np.newaxis, :])
    return plane, float(values[best])


def tangent_field(points, v_mass: AtomicVarifold,
                  params: EnergyParams) -> list[TangentFieldEntry]:
    """Pointwise tangent estimates at each evaluation point, in input
    order.  Per-point failures (isolated points) are recorded in the
    entry instead of aborting the field."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != v_mass.n:
        raise ValidationError(
            f"points have dimension {pts.shape[1]}, varifold has n={v_mass.n}")
    entries: list[TangentFieldEntry] = []
    for row in pts:
        try:
            est = estimate_tangent(row, v_mass, params)
            entries.append(TangentFieldEntry(tuple(row), est, None))
        except VarifoldError as exc:
            entries.append(TangentFieldEntry(tuple(row), None, str(exc)))
    return entries
