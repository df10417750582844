"""Rectifiability diagnostics for discrete varifolds.

Atomic and gridded measures carrying tangent-plane data, the scale-averaged
height-excess energy and its plane minimizer, exact face-sum first
variation of gridded measures, and Ahlfors/Jones regularity reports.
"""

from ._backend import backend_name, set_backend
from .atomic import (Atom, AtomicVarifold, Box, local_spacing, mass_in_ball, restrict,
                     sample_circle, sample_graph, sample_line, sample_square_cloud,
                     total_mass)
from .energy import (EnergyParams, EnergyReport, energy_alpha, energy_alpha_oracle,
                     height_excess, integrated_energy, local_energy_params, weight_kernel)
from .errors import NumericError, ValidationError, VarifoldError
from .firstvar import (FaceTerm, FirstVariationReport, SweepRow, explosion_sweep,
                       first_variation)
from .grassmann import (Plane, SubspaceResult, dist_point_to_plane, mean_plane,
                        plane_dist, plane_from_basis, principal_subspace, symmetrize)
from .gridding import CartesianGrid, DiscreteVarifold, atomize, discretize, grid_covering
from .regularity import (RegularityReport, ScaleRow, Verdict, ahlfors_constants,
                         density_ratios, hypothesis_report, jones_beta, jones_integral,
                         unit_ball_volume)
from .tangent import (TangentEstimate, TangentFieldEntry, estimate_tangent,
                      grid_search_oracle, moment_matrix, tangent_field)

__version__ = "0.1.0"

__all__ = [
    "Atom", "AtomicVarifold", "Box", "CartesianGrid", "DiscreteVarifold",
    "EnergyParams", "EnergyReport", "FaceTerm", "FirstVariationReport",
    "NumericError", "Plane", "RegularityReport", "ScaleRow", "SubspaceResult",
    "SweepRow", "TangentEstimate", "TangentFieldEntry", "ValidationError",
    "VarifoldError", "Verdict", "ahlfors_constants", "atomize", "backend_name",
    "density_ratios", "discretize", "dist_point_to_plane", "energy_alpha",
    "energy_alpha_oracle", "estimate_tangent", "explosion_sweep", "first_variation",
    "grid_covering", "grid_search_oracle", "height_excess", "hypothesis_report",
    "integrated_energy", "jones_beta", "jones_integral", "local_energy_params",
    "local_spacing", "mass_in_ball", "mean_plane", "moment_matrix", "plane_dist",
    "plane_from_basis", "principal_subspace", "restrict", "sample_circle",
    "sample_graph", "sample_line", "sample_square_cloud", "set_backend",
    "symmetrize", "tangent_field", "total_mass", "unit_ball_volume", "weight_kernel",
]
