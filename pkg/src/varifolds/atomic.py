"""Atomic measures with tangent data: weighted point clouds carrying one
plane per atom, ball-mass queries, and generators for ground-truth
rectifiable test sets (segments, circles, Lipschitz graphs).

An :class:`AtomicVarifold` is the universal in-memory representation of
this package: gridded measures are reduced to it by quadrature (see
:mod:`varifolds.gridding`) before any energy is evaluated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _backend
from .errors import NumericError, ValidationError
from .grassmann import ORTHO_TOL, Plane

# Default padding of an automatic domain box, as a fraction of the widest
# axis extent of the atom bounding box.
DOMAIN_PAD = 0.1


@dataclass(frozen=True)
class Box:
    """Axis-aligned box, used for domains and restriction windows."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self) -> None:
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or len(lo) == 0:
            raise ValidationError(f"box corner dimensions differ: {len(lo)} vs {len(hi)}")
        if any(a >= b for a, b in zip(lo, hi)):
            raise ValidationError(f"box must have positive extent on every axis: lo={lo}, hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def n(self) -> int:
        return len(self.lo)

    @property
    def extent(self) -> np.ndarray:
        return np.array(self.hi) - np.array(self.lo)

    @classmethod
    def bounding(cls, points: np.ndarray, pad_fraction: float = DOMAIN_PAD) -> "Box":
        """Bounding box of a point set, padded on every axis by
        ``pad_fraction`` of the widest axis extent (1.0 if all extents vanish)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        widest = float(np.max(hi - lo))
        pad = pad_fraction * (widest if widest > 0.0 else 1.0)
        return cls(tuple(lo - pad), tuple(hi + pad))

    def contains(self, points: np.ndarray, strict: bool = True) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        lo = np.array(self.lo)
        hi = np.array(self.hi)
        if strict:
            return np.all((pts > lo) & (pts < hi), axis=1)
        return np.all((pts >= lo) & (pts <= hi), axis=1)

    def dist_to_boundary(self, x: Sequence[float]) -> float:
        """Distance from an interior point to the box complement (<= 0 outside)."""
        p = np.asarray(x, dtype=float)
        return float(np.minimum(p - np.array(self.lo), np.array(self.hi) - p).min())

    def gap_to(self, outer: "Box") -> float:
        """Distance from this (inner) box to the complement of ``outer``."""
        if outer.n != self.n:
            raise ValidationError("box dimensions differ")
        lo_gap = np.array(self.lo) - np.array(outer.lo)
        hi_gap = np.array(outer.hi) - np.array(self.hi)
        return float(min(lo_gap.min(), hi_gap.min()))


@dataclass(frozen=True)
class Atom:
    """One weighted atom: position, tangent plane, positive mass."""

    x: tuple[float, ...]
    plane: Plane
    mass: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        if not (self.mass > 0.0 and np.isfinite(self.mass)):
            raise ValidationError(f"atom mass must be finite and > 0, got {self.mass}")
        if len(self.x) != self.plane.n:
            raise ValidationError("atom position dimension does not match its plane")


@dataclass(frozen=True, eq=False)
class AtomicVarifold:
    """Finite weighted atom list {(x_j, P_j, m_j)} on a box domain.

    Stored struct-of-arrays so the kernels can scan it directly:
    ``points`` (N, n), ``bases`` (N, d, n) row-orthonormal frames,
    ``masses`` (N,) all positive.
    """

    n: int
    d: int
    points: np.ndarray
    bases: np.ndarray
    masses: np.ndarray
    domain: Box = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        pts = np.ascontiguousarray(np.atleast_2d(np.asarray(self.points, dtype=float)))
        bases = np.ascontiguousarray(np.asarray(self.bases, dtype=float))
        masses = np.ascontiguousarray(np.asarray(self.masses, dtype=float).ravel())
        if not 1 <= self.d < self.n:
            raise ValidationError(f"need 1 <= d < n, got d={self.d}, n={self.n}")
        count = pts.shape[0]
        if count == 0:
            raise ValidationError("varifold needs at least one atom")
        if pts.shape != (count, self.n):
            raise ValidationError(f"points shape {pts.shape} != ({count}, {self.n})")
        if bases.shape != (count, self.d, self.n):
            raise ValidationError(f"bases shape {bases.shape} != ({count}, {self.d}, {self.n})")
        if masses.shape != (count,):
            raise ValidationError(f"masses shape {masses.shape} != ({count},)")
        if not np.all(np.isfinite(pts)) or not np.all(np.isfinite(bases)):
            raise ValidationError("points and bases must be finite")
        if not np.all(masses > 0.0) or not np.all(np.isfinite(masses)):
            bad = int(np.argmin(masses))
            raise ValidationError(f"atom {bad} has non-positive or non-finite mass {masses[bad]}")
        gram = np.einsum("jki,jli->jkl", bases, bases)
        if np.max(np.abs(gram - np.eye(self.d))) > ORTHO_TOL:
            raise ValidationError("atom frames are not orthonormal to 1e-12")
        domain = self.domain if self.domain is not None else Box.bounding(pts)
        if domain.n != self.n:
            raise ValidationError("domain dimension does not match ambient dimension")
        if not np.all(domain.contains(pts, strict=False)):
            bad = int(np.argmin(domain.contains(pts, strict=False)))
            raise ValidationError(f"atom {bad} lies outside the domain box")
        for arr in (pts, bases, masses):
            arr.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "bases", bases)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "domain", domain)

    @property
    def count(self) -> int:
        return self.points.shape[0]

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.masses))

    def atom(self, i: int) -> Atom:
        return Atom(tuple(self.points[i]), Plane(self.bases[i]), float(self.masses[i]))

    @classmethod
    def from_atoms(cls, atoms: Sequence[Atom], domain: Box | None = None) -> "AtomicVarifold":
        if len(atoms) == 0:
            raise ValidationError("varifold needs at least one atom")
        n = atoms[0].plane.n
        d = atoms[0].plane.d
        for a in atoms:
            if (a.plane.d, a.plane.n) != (d, n):
                raise ValidationError("all atom planes must share the same (d, n)")
        return cls(
            n=n,
            d=d,
            points=np.array([a.x for a in atoms]),
            bases=np.array([a.plane.basis for a in atoms]),
            masses=np.array([a.mass for a in atoms]),
            domain=domain,
        )

    def replace(self, **changes) -> "AtomicVarifold":
        """Copy with some fields replaced (arrays are re-validated)."""
        kwargs = dict(n=self.n, d=self.d, points=self.points, bases=self.bases,
                      masses=self.masses, domain=self.domain)
        kwargs.update(changes)
        return AtomicVarifold(**kwargs)

    def __repr__(self) -> str:
        return f"AtomicVarifold(n={self.n}, d={self.d}, count={self.count})"


def total_mass(v: AtomicVarifold) -> float:
    """Total mass of the measure: sum of the atom masses."""
    return v.total_mass


def mass_in_ball(v: AtomicVarifold, center: Sequence[float], r: float) -> float:
    """Mass of the open ball B_r(center): atoms with |x_j - center| < r."""
    if not r > 0.0:
        raise ValidationError(f"radius must be > 0, got {r}")
    c = np.asarray(center, dtype=float)
    if c.shape != (v.n,):
        raise ValidationError(f"center shape {c.shape} does not match ambient dimension {v.n}")
    return float(_backend.kernels().mass_in_ball(v.points, v.masses, c, float(r)))


def sample_line(a: Sequence[float], b: Sequence[float], count: int,
                domain: Box | None = None) -> AtomicVarifold:
    """Uniform sampling of the segment [a, b]: ``count`` atoms at the
    midpoints of equal subsegments, each of mass |b - a| / count, all
    carrying the segment direction as tangent plane."""
    pa = np.asarray(a, dtype=float)
    pb = np.asarray(b, dtype=float)
    if pa.shape != pb.shape or pa.ndim != 1 or pa.shape[0] < 2:
        raise ValidationError("endpoints must be equal-length vectors in R^n, n >= 2")
    if count < 2:
        raise ValidationError(f"count must be >= 2, got {count}")
    length = float(np.linalg.norm(pb - pa))
    if length == 0.0:
        raise ValidationError("endpoints coincide")
    t = (np.arange(count) + 0.5) / count
    points = pa + t[:, np.newaxis] * (pb - pa)
    direction = (pb - pa) / length
    bases = np.broadcast_to(direction, (count, 1, pa.shape[0])).copy()
    masses = np.full(count, length / count)
    return AtomicVarifold(n=pa.shape[0], d=1, points=points, bases=bases,
                          masses=masses, domain=domain)


def sample_circle(center: Sequence[float], radius: float, count: int,
                  domain: Box | None = None) -> AtomicVarifold:
    """Uniform sampling of a circle in R^2: atoms at equal angles, mass
    2*pi*R / count each, tangent line attached at every atom."""
    c = np.asarray(center, dtype=float)
    if c.shape != (2,):
        raise ValidationError("circle center must lie in R^2")
    if not radius > 0.0:
        raise ValidationError(f"radius must be > 0, got {radius}")
    if count < 3:
        raise ValidationError(f"count must be >= 3, got {count}")
    theta = 2.0 * np.pi * np.arange(count) / count
    points = c + radius * np.column_stack([np.cos(theta), np.sin(theta)])
    tangents = np.column_stack([-np.sin(theta), np.cos(theta)])
    bases = tangents[:, np.newaxis, :]
    masses = np.full(count, 2.0 * np.pi * radius / count)
    return AtomicVarifold(n=2, d=1, points=points, bases=bases, masses=masses, domain=domain)


def sample_graph(f: Callable[..., np.ndarray], grid: int, d: int = 1,
                 domain: Box | None = None) -> AtomicVarifold:
    """Sampling of the graph of f over the unit cube [0, 1]^d, d in {1, 2}.

    Atoms sit at (u, f(u)) for cell centers u; the slope per axis is the
    symmetric difference of f across the cell faces (u +- w/2, always
    inside the cube), which makes the area element and the tangent frame
    consistent with the same finite difference.  The midpoint mass rule
    carries an O(w^2) bias in the total area.

    ``f`` must accept d vectorized coordinate arrays: ``f(u)`` for d=1,
    ``f(u1, u2)`` for d=2.
    """
    if d not in (1, 2):
        raise ValidationError(f"graph dimension must be 1 or 2, got {d}")
    if grid < 1:
        raise ValidationError(f"grid must be >= 1, got {grid}")
    w = 1.0 / grid
    centers_1d = (np.arange(grid) + 0.5) * w
    if d == 1:
        u = centers_1d
        slope = (np.asarray(f(u + 0.5 * w), dtype=float) - np.asarray(f(u - 0.5 * w), dtype=float)) / w
        heights = np.asarray(f(u), dtype=float)
        points = np.column_stack([u, heights])
        norm = np.sqrt(1.0 + slope**2)
        bases = np.column_stack([1.0 / norm, slope / norm])[:, np.newaxis, :]
        masses = norm * w
        return AtomicVarifold(n=2, d=1, points=points, bases=bases, masses=masses, domain=domain)
    u1, u2 = np.meshgrid(centers_1d, centers_1d, indexing="ij")
    u1 = u1.ravel()
    u2 = u2.ravel()
    g1 = (np.asarray(f(u1 + 0.5 * w, u2), dtype=float) - np.asarray(f(u1 - 0.5 * w, u2), dtype=float)) / w
    g2 = (np.asarray(f(u1, u2 + 0.5 * w), dtype=float) - np.asarray(f(u1, u2 - 0.5 * w), dtype=float)) / w
    heights = np.asarray(f(u1, u2), dtype=float)
    points = np.column_stack([u1, u2, heights])
    count = points.shape[0]
    # Tangent frame from (e1 + g1 e3, e2 + g2 e3), orthonormalized in place.
    t1 = np.column_stack([np.ones(count), np.zeros(count), g1])
    t2 = np.column_stack([np.zeros(count), np.ones(count), g2])
    t1 /= np.linalg.norm(t1, axis=1, keepdims=True)
    t2 -= np.einsum("ij,ij->i", t2, t1)[:, np.newaxis] * t1
    t2 /= np.linalg.norm(t2, axis=1, keepdims=True)
    bases = np.stack([t1, t2], axis=1)
    masses = np.sqrt(1.0 + g1**2 + g2**2) * w * w
    return AtomicVarifold(n=3, d=2, points=points, bases=bases, masses=masses, domain=domain)


def sample_square_cloud(count: int, seed: int = 0, domain: Box | None = None) -> AtomicVarifold:
    """Uniform cloud on the unit square with seeded random line directions,
    unit total mass.  A genuinely 2-dimensional set deliberately carrying
    1-dimensional tangent data; the regularity checks are expected to
    reject it for d = 1."""
    if count < 2:
        raise ValidationError(f"count must be >= 2, got {count}")
    rng = np.random.default_rng(seed)
    points = rng.random((count, 2))
    theta = rng.random(count) * np.pi
    bases = np.column_stack([np.cos(theta), np.sin(theta)])[:, np.newaxis, :]
    masses = np.full(count, 1.0 / count)
    return AtomicVarifold(n=2, d=1, points=points, bases=bases, masses=masses, domain=domain)


def restrict(v: AtomicVarifold, box: Box) -> AtomicVarifold:
    """Restriction to an open box: keeps atoms strictly inside, with the
    box becoming the new domain."""
    if box.n != v.n:
        raise ValidationError("window dimension does not match the varifold")
    mask = box.contains(v.points, strict=True)
    if not np.any(mask):
        raise NumericError("empty restriction: no atom strictly inside the window")
    return AtomicVarifold(n=v.n, d=v.d, points=v.points[mask], bases=v.bases[mask],
                          masses=v.masses[mask], domain=box)


def local_spacing(v: AtomicVarifold, x: Sequence[float], k: int = 8) -> float:
    """Median nearest-neighbor distance among the k atoms closest to x.

    The sampling resolution near x; regularity statistics below roughly
    twice this scale are artifacts of atomization.
    """
    if v.count < 2:
        raise ValidationError("local spacing needs at least two atoms")
    c = np.asarray(x, dtype=float)
    dist = np.linalg.norm(v.points - c, axis=1)
    k = min(k, v.count)
    nearest = np.argsort(dist, kind="stable")[:k]
    nn = np.empty(k)
    for j, idx in enumerate(nearest):
        d2 = np.einsum("ij,ij->i", v.points - v.points[idx], v.points - v.points[idx])
        d2[idx] = np.inf
        nn[j] = np.sqrt(float(np.min(d2)))
    return float(np.median(nn))
