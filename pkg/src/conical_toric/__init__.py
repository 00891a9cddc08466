"""Exact invariants and Monge-Ampere numerics for conical Kahler-Einstein metrics on toric Fano manifolds."""

from .catalog import CATALOG, analyze, catalog_entry, format_polytope, parse_polytope
from .chern_numbers import (conical_chern_shift, conical_euler_signature, miyaoka_yau_check,
                            surface_intersection_matrix, toric_chern_numbers)
from .guillemin import (SymplecticPotential, legendre_potential, legendre_transform, moment_map,
                        verify_duality, weighted_guillemin_potential)
from .ma_solver import (RhoGrid, SolverConfig, barycenter_identity_check, continuity_solve, ma_residual,
                        pushforward_mass_check, reference_data, toric_functionals)
from .polytope_core import FacetPresentation, FanoPolytope, ValidationError, is_delzant, vertices_from_facets
from .special_solutions import (calabi_coefficients, calabi_roots, nonexistence_certificate,
                                p1_conical_potential)
from .toric_invariants import (cone_angles, divisor_of_point, effectiveness_window, greatest_ricci_lower_bound,
                               limiting_divisor, tau_of_alpha)

__version__ = "0.1.0"
