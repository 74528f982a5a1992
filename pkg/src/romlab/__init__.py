"""romlab: POD/Galerkin and Leray-regularized reduced order models for
the 2D incompressible Navier-Stokes manufactured-solution benchmark.
"""

from .exact import AnalyticSolution
from .fe import (FEField, SymmetricOperator, TriangleRule, VelocitySpace,
                 assemble_mass, assemble_stiffness, build_space, h1_semi_norm,
                 interpolate, l2_inner, l2_norm, triangle_rule,
                 trilinear_bstar)
from .filtering import FilterOperator, apply_filter, build_filter, filter_fe
from .mesh import TriMesh, build_mesh
from .pod import (PODBasis, RomStiffness, SnapshotSet, build_pod_basis,
                  collect_snapshots, correlation_matrix, default_times,
                  project_Pr, rom_laplacian, rom_stiffness, symmetric_eig,
                  truncation_errors)
from .rom import (LROMConfig, ROMOperators, ROMTrajectory,
                  StepDivergenceError, build_rom_operators,
                  build_trilinear_tensor, grom_step, lrom_step,
                  project_forcing, run, stability_check)
from .study import (StudyConfig, StudyResult, avg_filter_errors,
                    final_time_error, loglog_regression, run_study)

__version__ = "0.1.0"
