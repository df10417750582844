"""Averaged height-excess energies of atomic measures.

The scale-averaged flatness energy of a point x and plane P against a
measure is the r-integral over [alpha, r_max] of the height excess

    hex(x, P, r) = (1/r^d) * integral over B_r(x) of (d(y - x, P)/r)^2,

taken against dr/r.  For an atomic measure the r-integral and the atom
sum exchange (everything is nonnegative), which collapses the energy to
one closed-form radial weight per atom:

    E(x, P) = sum_j m_j * d(y_j - x, P)^2 * W(|y_j - x|),
    W(rho)  = integral of r^-(d+3) over [max(alpha, rho), r_max].

That exchange is the module's central design decision: energies of atomic
measures are exact (no radial quadrature error), and minimizing over
planes becomes a weighted second-moment eigenproblem (see
:mod:`varifolds.tangent`).  An independent midpoint-quadrature oracle is
kept alongside to check the closed form.

The windowed variant restricts both the atoms and the admissible radii:
``r_max`` becomes min(1, gap/2) where gap is the distance from the window
to the domain complement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .atomic import AtomicVarifold, Box
from .errors import ValidationError
from .grassmann import Plane

ORACLE_MIN_STEPS = 10


@dataclass(frozen=True)
class EnergyParams:
    """Scale cutoff, upper radius, and optional evaluation window."""

    alpha: float
    r_max: float = 1.0
    window: Box | None = None

    def __post_init__(self) -> None:
        if not (np.isfinite(self.alpha) and self.alpha > 0.0):
            raise ValidationError(f"alpha must be in (0, 1], got {self.alpha}")
        if not 0.0 < self.alpha <= self.r_max <= 1.0:
            raise ValidationError(
                f"need 0 < alpha <= r_max <= 1, got alpha={self.alpha}, r_max={self.r_max}"
            )


def local_energy_params(alpha: float, window: Box, domain: Box) -> EnergyParams:
    """Windowed parameters with the radius truncated at min(1, gap/2),
    gap being the distance from the window closure to the domain
    complement."""
    gap = window.gap_to(domain)
    if gap <= 0.0:
        raise ValidationError("window must be strictly inside the domain")
    return EnergyParams(alpha=alpha, r_max=min(1.0, 0.5 * gap), window=window)


@dataclass(frozen=True)
class EnergyReport:
    """Energy value with its parameters; per-atom contributions when kept.

    ``terms`` is aligned with the atom order of the evaluated varifold
    (zeros for atoms outside the window); the value is their fixed-order
    sum.
    """

    value: float
    params: EnergyParams
    terms: np.ndarray | None = None


def weight_kernel(rho, params: EnergyParams, d: int):
    """Closed-form radial weight W(rho); scalar in, scalar out (arrays pass
    through vectorized).  Continuous, nonincreasing, zero for rho >= r_max,
    constant on the plateau rho <= alpha."""
    if d < 1:
        raise ValidationError(f"d must be >= 1, got {d}")
    arr = np.asarray(rho, dtype=float)
    if np.any(arr < 0.0):
        raise ValidationError("rho must be nonnegative")
    from . import _kernels_numpy

    out = _kernels_numpy.weight_values(arr, params.alpha, params.r_max, d)
    if np.isscalar(rho) or getattr(rho, "ndim", 0) == 0:
        return float(out)
    return out


def _window_mask(v: AtomicVarifold, params: EnergyParams) -> np.ndarray | None:
    if params.window is None:
        return None
    if params.window.n != v.n:
        raise ValidationError("window dimension does not match the varifold")
    return params.window.contains(v.points, strict=True)


def _check_point(x, v: AtomicVarifold, params: EnergyParams) -> np.ndarray:
    c = np.asarray(x, dtype=float)
    if c.shape != (v.n,):
        raise ValidationError(f"point shape {c.shape} does not match ambient dimension {v.n}")
    if params.window is not None and not bool(params.window.contains(c, strict=True)[0]):
        raise ValidationError("evaluation point must lie inside the window")
    return c


def _check_plane(p: Plane, v: AtomicVarifold) -> None:
    if (p.d, p.n) != (v.d, v.n):
        raise ValidationError(f"plane ({p.d},{p.n}) does not match varifold ({v.d},{v.n})")


def energy_alpha(x, p: Plane, v: AtomicVarifold, params: EnergyParams,
                 keep_terms: bool = False) -> EnergyReport:
    """Scale-averaged height excess of (x, p) against the atomic measure.

    Exact for atomic measures: the radial integral is folded into the
    closed-form weight, so the only arithmetic is one weighted sum over
    atoms (in atom-index order).
    """
    c = _check_point(x, v, params)
    _check_plane(p, v)
    mask = _window_mask(v, params)
    points, masses = v.points, v.masses
    if mask is not None:
        points, masses = points[mask], masses[mask]
    k = _backend.kernels()
    if keep_terms:
        value, terms = k.energy_terms(points, masses, p.basis, c,
                                      v.d, params.alpha, params.r_max)
        if mask is not None:
            full = np.zeros(v.count)
            full[mask] = terms
            terms = full
        return EnergyReport(value=float(value), params=params, terms=terms)
    value = k.energy_value(points, masses, p.basis, c, v.d, params.alpha, params.r_max)
    return EnergyReport(value=float(value), params=params)


def energy_alpha_oracle(x, p: Plane, v: AtomicVarifold, params: EnergyParams,
                        steps: int) -> float:
    """Independent check of :func:`energy_alpha` by midpoint quadrature in r.

    Integrates r^-(d+3) * S(r) over [alpha, r_max] with ``steps`` midpoint
    nodes, where S(r) is the in-ball sum of m_j d(y_j - x, P)^2 (a cumulative
    sum over atoms sorted by distance).  Converges at rate O(1/steps) to the
    closed form; shares only the distance primitive with it.
    """
    if steps < ORACLE_MIN_STEPS:
        raise ValidationError(f"steps must be >= {ORACLE_MIN_STEPS}, got {steps}")
    c = _check_point(x, v, params)
    _check_plane(p, v)
    mask = _window_mask(v, params)
    points, masses = v.points, v.masses
    if mask is not None:
        points, masses = points[mask], masses[mask]
    diff = points - c
    rho = np.linalg.norm(diff, axis=1)
    coeff = diff @ p.basis.T
    resid = diff - coeff @ p.basis
    weighted = masses * np.einsum("ij,ij->i", resid, resid)
    order = np.argsort(rho, kind="stable")
    rho_sorted = rho[order]
    cumulative = np.concatenate([[0.0], np.cumsum(weighted[order])])
    width = (params.r_max - params.alpha) / steps
    if width <= 0.0:
        return 0.0
    nodes = params.alpha + (np.arange(steps) + 0.5) * width
    counts = np.searchsorted(rho_sorted, nodes, side="left")
    integrand = nodes ** (-(v.d + 3)) * cumulative[counts]
    return float(np.sum(integrand) * width)


def height_excess(x, p: Plane, v: AtomicVarifold, r: float, d: int | None = None) -> float:
    """Single-scale flatness defect: (1/r^d) * sum over the open ball of
    m_j (d(y_j - x, P)/r)^2."""
    if not r > 0.0:
        raise ValidationError(f"radius must be > 0, got {r}")
    c = np.asarray(x, dtype=float)
    if c.shape != (v.n,):
        raise ValidationError(f"point shape {c.shape} does not match ambient dimension {v.n}")
    _check_plane(p, v)
    if d is None:
        d = v.d
    diff = v.points - c
    rho2 = np.einsum("ij,ij->i", diff, diff)
    inside = rho2 < r * r
    if not np.any(inside):
        return 0.0
    sel = diff[inside]
    coeff = sel @ p.basis.T
    resid = sel - coeff @ p.basis
    dist2 = np.einsum("ij,ij->i", resid, resid)
    return float(np.sum(v.masses[inside] * dist2) / r ** (d + 2))


def integrated_energy(v_eval: AtomicVarifold, v_mass: AtomicVarifold,
                      params: EnergyParams, *, sample: int | None = None,
                      seed: int = 0) -> float:
    """Energy integrated against the evaluation measure:
    sum_i m_i * E(x_i, P_i, v_mass) over the atoms of ``v_eval``.

    With ``sample=k`` only k uniformly chosen eval atoms (without
    replacement, seeded) are evaluated and the sum is rescaled by N/k --
    an unbiased estimator of the full sum; ``sample=None`` or k >= N
    reproduces the full sum exactly.  The reduction order is the eval-atom
    index order.
    """
    if (v_eval.d, v_eval.n) != (v_mass.d, v_mass.n):
        raise ValidationError("evaluation and mass varifolds must share (d, n)")
    eval_mask = _window_mask(v_eval, params)
    mass_mask = _window_mask(v_mass, params)
    eval_points, eval_bases, eval_masses = v_eval.points, v_eval.bases, v_eval.masses
    if eval_mask is not None:
        eval_points = eval_points[eval_mask]
        eval_bases = eval_bases[eval_mask]
        eval_masses = eval_masses[eval_mask]
    mass_points, mass_masses = v_mass.points, v_mass.masses
    if mass_mask is not None:
        mass_points, mass_masses = mass_points[mass_mask], mass_masses[mass_mask]
    n_eval = eval_points.shape[0]
    if n_eval == 0:
        return 0.0
    scale = 1.0
    if sample is not None:
        if sample < 1:
            raise ValidationError(f"sample must be >= 1, got {sample}")
        if sample < n_eval:
            rng = np.random.default_rng(seed)
            idx = np.sort(rng.choice(n_eval, size=sample, replace=False))
            scale = n_eval / sample
            eval_points = eval_points[idx]
            eval_bases = eval_bases[idx]
            eval_masses = eval_masses[idx]
    energies = _backend.kernels().field_energies(
        np.ascontiguousarray(eval_points), np.ascontiguousarray(eval_bases),
        mass_points, mass_masses, v_eval.d, params.alpha, params.r_max)
    return float(np.sum(eval_masses * energies) * scale)
