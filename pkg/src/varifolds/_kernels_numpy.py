"""Pure-numpy implementations of the hot per-point kernels.

This module mirrors :mod:`varifolds._kernels_numba` function for function;
the active implementation is chosen by :mod:`varifolds._backend` (env flag
``VARIFOLDS_BACKEND``).  Every kernel takes plain float64 arrays:

- ``points``  : (N, n) atom positions
- ``masses``  : (N,) positive weights
- ``basis``   : (d, n) row-orthonormal frame of the reference plane
- ``center``  : (n,) evaluation point

Distances to planes are computed in residual form ``v - B^T (B v)`` to
avoid the cancellation of the |v|^2 - |Bv|^2 identity.
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"


def weight_values(rho, alpha: float, r_max: float, d: int) -> np.ndarray:
    """Radial weight W(rho): the r-integral of r^-(d+3) over [max(alpha, rho), r_max].

    Vanishes for rho >= r_max; constant on rho <= alpha.
    """
    rho = np.asarray(rho, dtype=float)
    p = d + 2
    lo = np.maximum(rho, alpha)
    return np.where(rho < r_max, (lo ** (-p) - r_max ** (-p)) / p, 0.0)


def mass_in_ball(points: np.ndarray, masses: np.ndarray, center: np.ndarray, r: float) -> float:
    diff = points - center
    inside = np.einsum("ij,ij->i", diff, diff) < r * r
    return float(np.sum(masses[inside]))


def _dist2_terms(points, masses, basis, center, d, alpha, r_max):
    v = points - center
    rho2 = np.einsum("ij,ij->i", v, v)
    coeff = v @ basis.T
    resid = v - coeff @ basis
    dist2 = np.einsum("ij,ij->i", resid, resid)
    w = weight_values(np.sqrt(rho2), alpha, r_max, d)
    return masses * dist2 * w


def energy_value(points, masses, basis, center, d: int, alpha: float, r_max: float) -> float:
    return float(np.sum(_dist2_terms(points, masses, basis, center, d, alpha, r_max)))


def energy_terms(points, masses, basis, center, d: int, alpha: float, r_max: float):
    terms = _dist2_terms(points, masses, basis, center, d, alpha, r_max)
    return float(np.sum(terms)), terms


def weighted_moment(points, masses, center, d: int, alpha: float, r_max: float) -> np.ndarray:
    """Second-moment matrix sum_j m_j W(rho_j) (y_j - x)(y_j - x)^T, exactly symmetric."""
    v = points - center
    rho = np.sqrt(np.einsum("ij,ij->i", v, v))
    w = masses * weight_values(rho, alpha, r_max, d)
    m = (v * w[:, np.newaxis]).T @ v
    return np.triu(m) + np.triu(m, 1).T


def ball_moments(points, masses, center, r: float):
    """Mass, mass centroid, and centered second moment of atoms in the open ball."""
    n = points.shape[1]
    diff = points - center
    inside = np.einsum("ij,ij->i", diff, diff) < r * r
    w = masses[inside]
    total = float(np.sum(w))
    if total <= 0.0:
        return 0.0, np.zeros(n), np.zeros((n, n))
    pts = points[inside]
    mean = (w[:, np.newaxis] * pts).sum(axis=0) / total
    c = pts - mean
    m2 = (c * w[:, np.newaxis]).T @ c
    return total, mean, np.triu(m2) + np.triu(m2, 1).T


def field_energies(eval_points, eval_bases, mass_points, mass_masses,
                   d: int, alpha: float, r_max: float) -> np.ndarray:
    """Energy of each (point, plane) pair against the mass cloud."""
    out = np.empty(eval_points.shape[0])
    for i in range(eval_points.shape[0]):
        out[i] = energy_value(mass_points, mass_masses, eval_bases[i], eval_points[i],
                              d, alpha, r_max)
    return out
