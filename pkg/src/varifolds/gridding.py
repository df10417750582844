"""Uniform cartesian grids, cell-aggregated measures, and quadrature
atomization.

``discretize`` turns an atomic measure into a sparse cell list
{(K, m_K, P_K)}: the cell mass is the mass landing in the half-open cell,
the cell plane is the mass-weighted Frobenius mean of the in-cell atom
planes (one eigenproblem per cell).  ``atomize`` goes back to atoms by a
tensor midpoint rule so the energy machinery can treat gridded measures
uniformly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterator

import numpy as np

from .atomic import AtomicVarifold, Box
from .errors import ValidationError
from .grassmann import Plane, principal_subspace, symmetrize


@dataclass(frozen=True)
class CartesianGrid:
    """Uniform axis-aligned grid: origin corner, cell side h, cells per axis.

    Cells are half-open boxes [lo, lo + h) per axis, so every point of the
    hull interior lands in exactly one cell.
    """

    origin: tuple[float, ...]
    h: float
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        origin = tuple(float(v) for v in self.origin)
        counts = tuple(int(c) for c in self.counts)
        if not (np.isfinite(self.h) and self.h > 0.0):
            raise ValidationError(f"cell side h must be > 0, got {self.h}")
        if len(origin) != len(counts) or len(origin) == 0:
            raise ValidationError("origin and counts must have the same positive length")
        if any(c < 1 for c in counts):
            raise ValidationError(f"counts must be >= 1 per axis, got {counts}")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return len(self.counts)

    @property
    def cell_volume(self) -> float:
        return self.h ** self.n

    @property
    def face_area(self) -> float:
        return self.h ** (self.n - 1)

    def hull(self) -> Box:
        hi = tuple(o + c * self.h for o, c in zip(self.origin, self.counts))
        return Box(self.origin, hi)

    def cell_index(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.floor((pts - np.array(self.origin)) / self.h).astype(np.int64)

    def index_inside(self, idx: np.ndarray) -> np.ndarray:
        idx = np.atleast_2d(idx)
        return np.all((idx >= 0) & (idx < np.array(self.counts)), axis=1)

    def cell_center(self, idx: np.ndarray) -> np.ndarray:
        return np.array(self.origin) + (np.asarray(idx, dtype=float) + 0.5) * self.h

    def linear_index(self, idx: np.ndarray) -> np.ndarray:
        return np.ravel_multi_index(np.atleast_2d(idx).T, self.counts)


def grid_covering(box: Box, h: float) -> CartesianGrid:
    """Smallest grid with origin at the box corner whose hull covers the box.

    When the box extent is an integer multiple of h the hull equals the
    box exactly (integer division is snapped to 1e-9 relative).
    """
    if not h > 0.0:
        raise ValidationError(f"cell side h must be > 0, got {h}")
    counts = []
    for lo, hi in zip(box.lo, box.hi):
        ratio = (hi - lo) / h
        counts.append(max(1, int(np.ceil(ratio - 1e-9))))
    return CartesianGrid(origin=box.lo, h=h, counts=tuple(counts))


@dataclass(frozen=True, eq=False)
class DiscreteVarifold:
    """Sparse cell measure on a cartesian grid: rows (K, m_K, P_K) with
    m_K > 0, ordered by linear cell index.  ``degenerate`` marks cells
    whose mean projector had no spectral gap at the cut (conflicting
    in-cell planes); their P_K is the deterministic tie-break."""

    grid: CartesianGrid
    d: int
    indices: np.ndarray
    masses: np.ndarray
    bases: np.ndarray
    degenerate: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        idx = np.ascontiguousarray(np.atleast_2d(np.asarray(self.indices, dtype=np.int64)))
        masses = np.ascontiguousarray(np.asarray(self.masses, dtype=float).ravel())
        bases = np.ascontiguousarray(np.asarray(self.bases, dtype=float))
        n = self.grid.n
        if not 1 <= self.d < n:
            raise ValidationError(f"need 1 <= d < n, got d={self.d}, n={n}")
        m = idx.shape[0]
        if m == 0:
            raise ValidationError("discrete varifold needs at least one cell")
        if idx.shape != (m, n) or masses.shape != (m,) or bases.shape != (m, self.d, n):
            raise ValidationError("cell array shapes are inconsistent")
        if not np.all(self.grid.index_inside(idx)):
            raise ValidationError("cell index outside the grid")
        if not np.all(masses > 0.0) or not np.all(np.isfinite(masses)):
            raise ValidationError("cell masses must be finite and > 0")
        lin = self.grid.linear_index(idx)
        if np.any(np.diff(lin) <= 0):
            order = np.argsort(lin, kind="stable")
            if np.unique(lin).shape[0] != m:
                raise ValidationError("duplicate cell indices")
            idx, masses, bases = idx[order], masses[order], bases[order]
        flags = self.degenerate
        if flags is None:
            flags = np.zeros(m, dtype=bool)
        flags = np.ascontiguousarray(np.asarray(flags, dtype=bool).ravel())
        if flags.shape != (m,):
            raise ValidationError("degenerate flag shape mismatch")
        for arr in (idx, masses, bases, flags):
            arr.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "bases", bases)
        object.__setattr__(self, "degenerate", flags)

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def cell_count(self) -> int:
        return self.indices.shape[0]

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.masses))

    def cell(self, index: tuple[int, ...]) -> tuple[float, Plane] | None:
        """Mass and plane of one cell, or None for an (implicit) empty cell."""
        key = np.asarray(index, dtype=np.int64)[np.newaxis, :]
        if not bool(self.grid.index_inside(key)[0]):
            raise ValidationError(f"cell index {tuple(index)} outside the grid")
        lin = self.grid.linear_index(self.indices)
        target = self.grid.linear_index(key)[0]
        pos = int(np.searchsorted(lin, target))
        if pos >= len(lin) or lin[pos] != target:
            return None
        return float(self.masses[pos]), Plane(self.bases[pos])

    def iter_cells(self) -> Iterator[tuple[tuple[int, ...], float, Plane]]:
        for i in range(self.cell_count):
            yield tuple(int(v) for v in self.indices[i]), float(self.masses[i]), Plane(self.bases[i])

    def __repr__(self) -> str:
        return (f"DiscreteVarifold(n={self.n}, d={self.d}, h={self.grid.h}, "
                f"cells={self.cell_count})")


def discretize(v: AtomicVarifold, grid: CartesianGrid) -> DiscreteVarifold:
    """Cell aggregation of an atomic measure.

    m_K is the atom mass landing in the half-open cell K; P_K minimizes
    the mass-weighted squared Frobenius distance to the in-cell atom
    planes (the dominant eigenspace of the weighted mean projector).
    Total mass is conserved up to summation roundoff.
    """
    if grid.n != v.n:
        raise ValidationError("grid dimension does not match the varifold")
    idx = grid.cell_index(v.points)
    inside = grid.index_inside(idx)
    if not np.all(inside):
        bad = np.flatnonzero(~inside)
        head = ", ".join(str(int(b)) for b in bad[:8])
        more = "" if bad.size <= 8 else f" (+{bad.size - 8} more)"
        raise ValidationError(f"atoms outside the grid at atom index {head}{more}")
    lin = grid.linear_index(idx)
    order = np.argsort(lin, kind="stable")
    lin_sorted = lin[order]
    boundaries = np.flatnonzero(np.diff(lin_sorted)) + 1
    groups = np.split(order, boundaries)
    projs = np.einsum("jki,jkl->jil", v.bases, v.bases)
    cell_indices = np.empty((len(groups), v.n), dtype=np.int64)
    cell_masses = np.empty(len(groups))
    cell_bases = np.empty((len(groups), v.d, v.n))
    cell_flags = np.empty(len(groups), dtype=bool)
    for row, grp in enumerate(groups):
        cell_indices[row] = idx[grp[0]]
        w = v.masses[grp]
        cell_masses[row] = float(np.sum(w))
        mean_proj = symmetrize(np.tensordot(w, projs[grp], axes=1) / cell_masses[row])
        plane, _, degenerate = principal_subspace(mean_proj, v.d)
        cell_bases[row] = plane.basis
        cell_flags[row] = degenerate
    return DiscreteVarifold(grid=grid, d=v.d, indices=cell_indices, masses=cell_masses,
                            bases=cell_bases, degenerate=cell_flags)


def atomize(dv: DiscreteVarifold, q: int) -> AtomicVarifold:
    """Midpoint-rule quadrature of the cell measure: q^n atoms per nonzero
    cell at the tensor midpoint nodes, each of mass m_K / q^n, carrying the
    cell plane.  Atom order is cell order, then node order (lexicographic).
    """
    if q < 1:
        raise ValidationError(f"q must be >= 1, got {q}")
    n = dv.n
    offsets = np.array(list(product(*(range(q),) * n)), dtype=float)
    offsets = (offsets + 0.5) / q  # (q^n, n), fractions of the cell side
    nodes_per_cell = offsets.shape[0]
    origin = np.array(dv.grid.origin)
    h = dv.grid.h
    corners = origin + dv.indices.astype(float) * h
    points = (corners[:, np.newaxis, :] + offsets[np.newaxis, :, :] * h).reshape(-1, n)
    masses = np.repeat(dv.masses / nodes_per_cell, nodes_per_cell)
    bases = np.repeat(dv.bases, nodes_per_cell, axis=0)
    return AtomicVarifold(n=n, d=dv.d, points=points, bases=bases, masses=masses,
                          domain=dv.grid.hull())
