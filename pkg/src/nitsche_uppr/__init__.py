"""Unfitted Nitsche finite elements for 2D elliptic interface problems with
polynomial-preserving gradient recovery and a recovery-based error estimator."""

from .analysis import (ConvergenceReport, ErrorTriple, State, adaptive_initial_mesh, check_assumption2, effectivity,
                       eoc, error_norms, interpolate_exact, refine_level, solve_problem)
from .assembly import ProblemSpec, SparseSystem, apply_dirichlet, assemble
from .errors import (AssumptionViolation, BudgetExceeded, ConfigError, DegenerateCut, IndefiniteDetected,
                     MeshError, NitscheError, NoConvergence, NotConverged, PatchFailure)
from .geometry import Classification, classify_elements, cut_info, cut_infos, edge_intersection
from .interfaces import Interface, PolylineInterface, get_interface
from .kernels import BACKEND
from .mesh import Mesh, bisect, element_geometry, refine_red, uniform_mesh
from .problems import get_problem
from .recovery import estimate, mesh_norm, ppr_recover, uppr
from .solver import SolveReport, solve
from .space import DofMap, PairedField, build_dofmap

__version__ = "0.1.0"
