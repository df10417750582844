"""Numba-compiled twins of the kernels in :mod:`varifolds._kernels_numpy`.

Same signatures, same semantics; explicit loops compiled with ``@njit``.
Compiled machine code is cached on disk, so the JIT cost is paid once per
interpreter/version.  ``field_energies`` is the only parallel kernel: each
evaluation point is independent, so the output array does not depend on
the thread schedule.
"""

from __future__ import annotations

import warnings

import numpy as np
from numba import njit, prange

# Old system TBB builds trigger a benign fallback warning from the parallel
# layer; the fallback itself is fine.
warnings.filterwarnings("ignore", message="The TBB threading layer requires TBB version")

NAME = "numba"


@njit(cache=True)
def _weight_scalar(rho, alpha, r_max, d):
    if rho >= r_max:
        return 0.0
    p = d + 2
    lo = rho if rho > alpha else alpha
    return (lo ** (-p) - r_max ** (-p)) / p


@njit(cache=True)
def weight_values(rho, alpha, r_max, d):
    rho = np.asarray(rho)
    out = np.empty(rho.shape[0])
    for j in range(rho.shape[0]):
        out[j] = _weight_scalar(rho[j], alpha, r_max, d)
    return out


@njit(cache=True)
def mass_in_ball(points, masses, center, r):
    total = 0.0
    r2 = r * r
    for j in range(points.shape[0]):
        rho2 = 0.0
        for a in range(points.shape[1]):
            t = points[j, a] - center[a]
            rho2 += t * t
        if rho2 < r2:
            total += masses[j]
    return total


@njit(cache=True)
def energy_value(points, masses, basis, center, d, alpha, r_max):
    n_atoms, n = points.shape
    dd = basis.shape[0]
    v = np.empty(n)
    res = np.empty(n)
    acc = 0.0
    for j in range(n_atoms):
        rho2 = 0.0
        for a in range(n):
            v[a] = points[j, a] - center[a]
            rho2 += v[a] * v[a]
        rho = np.sqrt(rho2)
        if rho >= r_max:
            continue
        w = _weight_scalar(rho, alpha, r_max, d)
        for a in range(n):
            res[a] = v[a]
        for k in range(dd):
            c = 0.0
            for a in range(n):
                c += basis[k, a] * v[a]
            for a in range(n):
                res[a] -= c * basis[k, a]
        dist2 = 0.0
        for a in range(n):
            dist2 += res[a] * res[a]
        acc += masses[j] * dist2 * w
    return acc


@njit(cache=True)
def energy_terms(points, masses, basis, center, d, alpha, r_max):
    n_atoms, n = points.shape
    dd = basis.shape[0]
    v = np.empty(n)
    res = np.empty(n)
    terms = np.zeros(n_atoms)
    acc = 0.0
    for j in range(n_atoms):
        rho2 = 0.0
        for a in range(n):
            v[a] = points[j, a] - center[a]
            rho2 += v[a] * v[a]
        rho = np.sqrt(rho2)
        if rho >= r_max:
            continue
        w = _weight_scalar(rho, alpha, r_max, d)
        for a in range(n):
            res[a] = v[a]
        for k in range(dd):
            c = 0.0
            for a in range(n):
                c += basis[k, a] * v[a]
            for a in range(n):
                res[a] -= c * basis[k, a]
        dist2 = 0.0
        for a in range(n):
            dist2 += res[a] * res[a]
        terms[j] = masses[j] * dist2 * w
        acc += terms[j]
    return acc, terms


@njit(cache=True)
def weighted_moment(points, masses, center, d, alpha, r_max):
    n_atoms, n = points.shape
    v = np.empty(n)
    m = np.zeros((n, n))
    for j in range(n_atoms):
        rho2 = 0.0
        for a in range(n):
            v[a] = points[j, a] - center[a]
            rho2 += v[a] * v[a]
        rho = np.sqrt(rho2)
        if rho >= r_max:
            continue
        w = masses[j] * _weight_scalar(rho, alpha, r_max, d)
        for a in range(n):
            for b in range(a, n):
                m[a, b] += w * v[a] * v[b]
    for a in range(n):
        for b in range(a + 1, n):
            m[b, a] = m[a, b]
    return m


@njit(cache=True)
def ball_moments(points, masses, center, r):
    n_atoms, n = points.shape
    r2 = r * r
    total = 0.0
    mean = np.zeros(n)
    for j in range(n_atoms):
        rho2 = 0.0
        for a in range(n):
            t = points[j, a] - center[a]
            rho2 += t * t
        if rho2 < r2:
            total += masses[j]
            for a in range(n):
                mean[a] += masses[j] * points[j, a]
    m2 = np.zeros((n, n))
    if total <= 0.0:
        return 0.0, mean, m2
    for a in range(n):
        mean[a] /= total
    c = np.empty(n)
    for j in range(n_atoms):
        rho2 = 0.0
        for a in range(n):
            t = points[j, a] - center[a]
            rho2 += t * t
        if rho2 < r2:
            for a in range(n):
                c[a] = points[j, a] - mean[a]
            for a in range(n):
                for b in range(a, n):
                    m2[a, b] += masses[j] * c[a] * c[b]
    for a in range(n):
        for b in range(a + 1, n):
            m2[b, a] = m2[a, b]
    return total, mean, m2


@njit(cache=True, parallel=True)
def field_energies(eval_points, eval_bases, mass_points, mass_masses, d, alpha, r_max):
    out = np.empty(eval_points.shape[0])
    for i in prange(eval_points.shape[0]):
        out[i] = energy_value(mass_points, mass_masses, eval_bases[i], eval_points[i],
                              d, alpha, r_max)
    return out
