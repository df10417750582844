"""Total variation of the first variation of a gridded measure.

For a cell-wise measure with densities m_K/|K| and planes P_K the first
variation concentrates on mesh faces, and its total variation is an exact
face sum: an internal face (both neighbor cells charged) contributes

    | (m_+/|K|) proj_+ - (m_-/|K|) proj_- ) applied to the face normal | * h^(n-1),

a boundary face (one side charged) contributes (m/|K|) |proj n| * h^(n-1).
Faces on the grid hull are excluded -- the measure lives on the open hull
and test fields vanish there -- and faces between two empty cells carry
nothing.  This blows up like 1/h under refinement whenever cell planes are
not aligned with the mesh, which is the phenomenon ``explosion_sweep``
tabulates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .atomic import AtomicVarifold, Box
from .errors import ValidationError
from .gridding import DiscreteVarifold, discretize, grid_covering

INTERNAL = "internal"
BOUNDARY = "boundary"


@dataclass(frozen=True)
class FaceTerm:
    """One mesh face with its contribution to |dV|(hull interior).

    ``cell`` is the charged cell (for boundary faces) or the lower-index
    cell of the pair (for internal faces), ``neighbor`` the cell across
    the face (None only for boundary faces), ``axis`` the face normal
    direction.
    """

    kind: str
    cell: tuple[int, ...]
    neighbor: tuple[int, ...] | None
    axis: int
    density: float
    area: float

    @property
    def contribution(self) -> float:
        return self.density * self.area


@dataclass(frozen=True)
class FirstVariationReport:
    """Face terms plus their fixed-order totals."""

    terms: tuple[FaceTerm, ...]
    total: float
    internal_total: float
    boundary_total: float


@dataclass(frozen=True)
class SweepRow:
    h: float
    total: float
    h_total: float


def first_variation(dv: DiscreteVarifold) -> FirstVariationReport:
    """Exact face-sum total variation of the first variation.

    Faces are visited in cell order (cells sorted by linear index), axis
    by axis, upper face then lower face, and the totals accumulate in that
    fixed order.
    """
    grid = dv.grid
    n = grid.n
    counts = grid.counts
    area = grid.face_area
    inv_volume = 1.0 / grid.cell_volume
    projs = np.einsum("jki,jkl->jil", dv.bases, dv.bases)
    densities = dv.masses * inv_volume
    occupied = {tuple(int(v) for v in dv.indices[i]): i for i in range(dv.cell_count)}

    terms: list[FaceTerm] = []
    internal_total = 0.0
    boundary_total = 0.0
    for i in range(dv.cell_count):
        idx = tuple(int(v) for v in dv.indices[i])
        for axis in range(n):
            # Upper face: between this cell and its +axis neighbor.
            if idx[axis] + 1 < counts[axis]:
                up = idx[:axis] + (idx[axis] + 1,) + idx[axis + 1:]
                j = occupied.get(up)
                if j is not None:
                    column = densities[j] * projs[j][:, axis] - densities[i] * projs[i][:, axis]
                    density = float(np.linalg.norm(column))
                    terms.append(FaceTerm(INTERNAL, idx, up, axis, density, area))
                    internal_total += density * area
                else:
                    density = densities[i] * float(np.linalg.norm(projs[i][:, axis]))
                    terms.append(FaceTerm(BOUNDARY, idx, None, axis, density, area))
                    boundary_total += density * area
            # Lower face: only when the -axis neighbor is empty (an occupied
            # neighbor owns this face as its upper face).
            if idx[axis] > 0:
                down = idx[:axis] + (idx[axis] - 1,) + idx[axis + 1:]
                if down not in occupied:
                    density = densities[i] * float(np.linalg.norm(projs[i][:, axis]))
                    terms.append(FaceTerm(BOUNDARY, idx, None, axis, density, area))
                    boundary_total += density * area
    return FirstVariationReport(
        terms=tuple(terms),
        total=internal_total + boundary_total,
        internal_total=internal_total,
        boundary_total=boundary_total,
    )


def explosion_sweep(v: AtomicVarifold, h_list, domain: Box | None = None) -> list[SweepRow]:
    """Discretize at each cell size and tabulate (h, |dV|, h * |dV|).

    The grid at each h covers ``domain`` (the varifold domain by default),
    so the hull plays the role of the ambient open set throughout the
    sweep.
    """
    h_values = [float(h) for h in h_list]
    if len(h_values) == 0:
        raise ValidationError("h_list must be nonempty")
    if any(h <= 0.0 for h in h_values):
        raise ValidationError("h_list entries must be > 0")
    box = domain if domain is not None else v.domain
    rows = []
    for h in h_values:
        report = first_variation(discretize(v, grid_covering(box, h)))
        rows.append(SweepRow(h=h, total=report.total, h_total=h * report.total))
    return rows
