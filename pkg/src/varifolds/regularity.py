"""Quantitative regularity checks: Ahlfors density constants, L^2 Jones
numbers and their scale integral, and the consolidated hypothesis report
for a discretization sequence.

The report certifies the *checkable finite-scale hypotheses* of the
rectifiability criteria -- two-sided density bounds above the cutoff
scale, boundedness of the integrated energies along the sequence -- never
the rectifiability conclusion itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .atomic import AtomicVarifold, local_spacing, mass_in_ball
from .energy import EnergyParams, integrated_energy
from .errors import NumericError, ValidationError
from .gridding import DiscreteVarifold, atomize
from .grassmann import principal_subspace

AHLFORS_RADII_PER_CENTER = 32
JONES_MIN_STEPS = 16
# Default verdict bands: overall density spread c2_hat/c1_hat allowed
# across scales, and max/min ratio of the trailing integrated energies.
DENSITY_BAND = 4.0
ENERGY_BAND = 2.0
ENERGY_TAIL = 3


def unit_ball_volume(d: int) -> float:
    """Volume of the unit ball in R^d via the two-step recursion
    w_d = w_{d-2} * 2 pi / d (w_0 = 1, w_1 = 2)."""
    if d < 0:
        raise ValidationError(f"dimension must be >= 0, got {d}")
    if d == 0:
        return 1.0
    if d == 1:
        return 2.0
    return unit_ball_volume(d - 2) * 2.0 * np.pi / d


def density_ratios(v: AtomicVarifold, x, radii) -> list[tuple[float, float]]:
    """Density ratios mass(B_r(x)) / (w_d r^d) per radius.

    Radii reaching the domain boundary are marked with a NaN ratio and
    excluded from any constants derived downstream.
    """
    c = np.asarray(x, dtype=float)
    if c.shape != (v.n,):
        raise ValidationError(f"point shape {c.shape} does not match ambient dimension {v.n}")
    omega = unit_ball_volume(v.d)
    boundary = v.domain.dist_to_boundary(c)
    out = []
    for r in radii:
        r = float(r)
        if r <= 0.0:
            raise ValidationError(f"radii must be > 0, got {r}")
        if r >= boundary:
            out.append((r, float("nan")))
            continue
        out.append((r, mass_in_ball(v, c, r) / (omega * r**v.d)))
    return out


def ahlfors_constants(v: AtomicVarifold, beta_cut: float, sample: int = 64,
                      seed: int = 0) -> tuple[float, float]:
    """Measured two-sided density constants (c1_hat, c2_hat).

    Min and max of the density ratio over ``sample`` mass-weighted random
    atom locations and a 32-point log grid of radii between ``beta_cut``
    and each point's distance to the domain boundary.
    """
    if not beta_cut > 0.0:
        raise ValidationError(f"beta_cut must be > 0, got {beta_cut}")
    if sample < 1:
        raise ValidationError(f"sample must be >= 1, got {sample}")
    rng = np.random.default_rng(seed)
    weights = v.masses / v.total_mass
    chosen = rng.choice(v.count, size=sample, replace=True, p=weights)
    lo_ratio = np.inf
    hi_ratio = -np.inf
    valid = 0
    for i in chosen:
        x = v.points[i]
        boundary = v.domain.dist_to_boundary(x)
        if boundary <= beta_cut:
            continue
        radii = np.geomspace(beta_cut, boundary, AHLFORS_RADII_PER_CENTER + 2)[1:-1]
        for r, ratio in density_ratios(v, x, radii):
            if np.isnan(ratio):
                continue
            valid += 1
            lo_ratio = min(lo_ratio, ratio)
            hi_ratio = max(hi_ratio, ratio)
    if valid == 0:
        raise NumericError(
            f"no valid (x, r) sample: beta_cut={beta_cut} reaches the domain boundary "
            "from every sampled atom")
    return float(lo_ratio), float(hi_ratio)


def jones_beta(x, r: float, v: AtomicVarifold) -> float:
    """L^2 Jones number at one location and scale.

    The best affine d-plane through the in-ball atoms is exact: shift to
    the mass centroid, then the dominant d-eigenspace of the centered
    second moment; the returned value is the square root of the residual
    spectrum over r^(d+2).  Empty balls give 0.
    """
    if not r > 0.0:
        raise ValidationError(f"radius must be > 0, got {r}")
    c = np.asarray(x, dtype=float)
    if c.shape != (v.n,):
        raise ValidationError(f"point shape {c.shape} does not match ambient dimension {v.n}")
    total, _, second = _backend.kernels().ball_moments(v.points, v.masses, c, float(r))
    if total <= 0.0:
        return 0.0
    second = np.asarray(second)
    _, eigenvalues, _ = principal_subspace(second, v.d)
    residual = max(float(np.sum(eigenvalues[v.d:])), 0.0)
    return float(np.sqrt(residual / r ** (v.d + 2)))


def jones_integral(x, v: AtomicVarifold, r_steps: int = 64,
                   r_floor: float | None = None) -> float:
    """Scale integral of the squared Jones numbers, midpoint rule on a log
    grid of radii in [r_floor, 1].

    ``r_floor`` defaults to twice the local inter-atom spacing at x; below
    the sampling scale the Jones numbers measure atomization, not the
    underlying set.  Returns 0 when the floor reaches 1.
    """
    if r_steps < JONES_MIN_STEPS:
        raise ValidationError(f"r_steps must be >= {JONES_MIN_STEPS}, got {r_steps}")
    if r_floor is None:
        r_floor = 2.0 * local_spacing(v, x)
    if not r_floor > 0.0:
        raise ValidationError(f"r_floor must be > 0, got {r_floor}")
    if r_floor >= 1.0:
        return 0.0
    dt = -np.log(r_floor) / r_steps
    nodes = r_floor * np.exp((np.arange(r_steps) + 0.5) * dt)
    values = np.array([jones_beta(x, r, v) ** 2 for r in nodes])
    return float(np.sum(values) * dt)


@dataclass(frozen=True)
class ScaleRow:
    """Per-scale measurements of a discretization sequence."""

    delta: float
    alpha: float
    beta_cut: float
    c1: float
    c2: float
    energy: float


@dataclass(frozen=True)
class Verdict:
    """Pass/fail of the two checkable hypotheses, with margins.

    Density: the overall spread c2_hat/c1_hat across scales stays within
    ``density_band``.  Energy: the trailing integrated energies (last
    ``ENERGY_TAIL`` scales) have max/min within ``energy_band``; the
    running sup and the last increment are reported alongside.
    """

    density_pass: bool
    density_spread: float
    density_band: float
    energy_pass: bool
    energy_tail_ratio: float
    energy_band: float
    energy_sup: float
    energy_last_increment: float

    @property
    def overall_pass(self) -> bool:
        return self.density_pass and self.energy_pass

    def lines(self) -> list[str]:
        return [
            f"density  : {'pass' if self.density_pass else 'FAIL'} "
            f"(spread c2_hat/c1_hat = {self.density_spread:.4g}, band {self.density_band:g})",
            f"energy   : {'pass' if self.energy_pass else 'FAIL'} "
            f"(tail max/min = {self.energy_tail_ratio:.4g}, band {self.energy_band:g}, "
            f"sup = {self.energy_sup:.6g}, last increment = {self.energy_last_increment:+.3g})",
            f"overall  : {'pass' if self.overall_pass else 'FAIL'}",
        ]


@dataclass(frozen=True)
class RegularityReport:
    """Consolidated hypothesis check across a discretization sequence."""

    rows: tuple[ScaleRow, ...]
    c1_hat: float
    c2_hat: float
    beta_cut: float
    jones_integrals: tuple[float, ...]
    energy_sup: float
    verdict: Verdict


def hypothesis_report(seq, q: int = 3, *, sample: int = 64, seed: int = 0,
                      energy_sample: int | None = None,
                      density_band: float = DENSITY_BAND,
                      energy_band: float = ENERGY_BAND,
                      jones_points: int = 4) -> RegularityReport:
    """Evaluate the rectifiability hypotheses across a sequence of scales.

    ``seq`` is a list of (DiscreteVarifold, alpha, beta_cut) triples with
    decreasing alphas.  Each scale is atomized with q nodes per axis, its
    density constants measured above that scale's beta_cut, and its
    integrated energy evaluated at that scale's alpha.  Jones integrals
    are sampled on the finest scale.
    """
    entries = list(seq)
    if len(entries) == 0:
        raise ValidationError("sequence must be nonempty")
    alphas = [float(a) for _, a, _ in entries]
    if any(a2 >= a1 for a1, a2 in zip(alphas, alphas[1:])):
        raise ValidationError(f"alphas must be strictly decreasing, got {alphas}")
    rows: list[ScaleRow] = []
    finest: AtomicVarifold | None = None
    for dv, alpha, beta_cut in entries:
        if not isinstance(dv, DiscreteVarifold):
            raise ValidationError("sequence entries must be (DiscreteVarifold, alpha, beta_cut)")
        cloud = atomize(dv, q)
        c1, c2 = ahlfors_constants(cloud, float(beta_cut), sample=sample, seed=seed)
        energy = integrated_energy(cloud, cloud, EnergyParams(alpha=float(alpha)),
                                   sample=energy_sample, seed=seed)
        rows.append(ScaleRow(delta=dv.grid.h, alpha=float(alpha), beta_cut=float(beta_cut),
                             c1=c1, c2=c2, energy=energy))
        finest = cloud
    assert finest is not None
    c1_hat = min(row.c1 for row in rows)
    c2_hat = max(row.c2 for row in rows)
    energies = [row.energy for row in rows]
    tail = energies[-ENERGY_TAIL:]
    tail_ratio = max(tail) / max(min(tail), np.finfo(float).tiny)
    spread = c2_hat / max(c1_hat, np.finfo(float).tiny)
    verdict = Verdict(
        density_pass=bool(spread <= density_band),
        density_spread=float(spread),
        density_band=float(density_band),
        energy_pass=bool(tail_ratio <= energy_band),
        energy_tail_ratio=float(tail_ratio),
        energy_band=float(energy_band),
        energy_sup=float(max(energies)),
        energy_last_increment=float(energies[-1] - energies[-2]) if len(energies) > 1 else 0.0,
    )
    rng = np.random.default_rng(seed)
    weights = finest.masses / finest.total_mass
    jones_values = []
    for i in rng.choice(finest.count, size=min(jones_points, finest.count),
                        replace=True, p=weights):
        jones_values.append(jones_integral(finest.points[i], finest))
    return RegularityReport(
        rows=tuple(rows),
        c1_hat=float(c1_hat),
        c2_hat=float(c2_hat),
        beta_cut=rows[-1].beta_cut,
        jones_integrals=tuple(jones_values),
        energy_sup=verdict.energy_sup,
        verdict=verdict,
    )
