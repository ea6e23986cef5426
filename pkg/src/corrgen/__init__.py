"""Smooth collision-free corridors around a reference path through a point cloud."""

from ._accel import BACKEND as KERNEL_BACKEND
from .chebyshev import ChebyshevPoly, basis_matrix, clenshaw
from .corridor import (Corridor2D, Corridor3D, EllipseSlice, Mesh, contains, corridor_area_2d,
                       corridor_volume, eval_inequality, recover_ellipse, sample_boundary_mesh)
from .errors import (CorrgenError, DegeneracyError, DegenerateSegmentError, DomainError, InputError,
                     ParseError, SolverError, UnboundedProblemError, ValidationError)
from .io import load_cloud, load_corridor, load_path, save_cloud, save_corridor, save_path
from .optimize import (DD_LP, EXACT_CONE, EigenBoundConfig, ProblemSpec, SolveReport, build_corridor,
                       degree_sweep, solve_2d, solve_3d)
from .path import FrameStation, ParametricPath, build_path_from_waypoints, eval_path, straight_path
from .projection import ProjectedCloud, WrapperConfig, apply_wrapper, project_cloud
from .scenes import FIXTURES, SceneSpec, generate_scene

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND", "ChebyshevPoly", "basis_matrix", "clenshaw",
    "Corridor2D", "Corridor3D", "EllipseSlice", "Mesh", "contains", "corridor_area_2d", "corridor_volume",
    "eval_inequality", "recover_ellipse", "sample_boundary_mesh",
    "CorrgenError", "DegeneracyError", "DegenerateSegmentError", "DomainError", "InputError", "ParseError",
    "SolverError", "UnboundedProblemError", "ValidationError",
    "load_cloud", "load_corridor", "load_path", "save_cloud", "save_corridor", "save_path",
    "DD_LP", "EXACT_CONE", "EigenBoundConfig", "ProblemSpec", "SolveReport", "build_corridor",
    "degree_sweep", "solve_2d", "solve_3d",
    "FrameStation", "ParametricPath", "build_path_from_waypoints", "eval_path", "straight_path",
    "ProjectedCloud", "WrapperConfig", "apply_wrapper", "project_cloud",
    "FIXTURES", "SceneSpec", "generate_scene",
]
