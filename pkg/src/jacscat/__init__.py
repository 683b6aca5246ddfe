"""Direct and inverse scattering for doubly-infinite Jacobi matrices with
spectrum [-2, 2]: Jost solutions and the scattering triple, reproducing-kernel
reconstruction from a reflection coefficient, the uniqueness defect, and the
matrix A2 diagnostics that characterize well-posedness."""

from .config import RunConfig
from .harmonic import (CircleFunction, CircleGrid, OuterFunction, analyze,
                       from_coeff_dict, outer_from_modulus, riesz_project,
                       star, synthesize, szego_inner)
from .jacobi import (JacobiOperator, SpectralDensity, WeylFunctions,
                     orthonormal_polys, resolvent_2x2, spectral_density,
                     szego_class_check, weyl_half_line)
from .forward import (JostFamily, ScatteringMatrix, extract_scattering,
                      forward_pipeline, jost_solutions)
from .hankel import (HankelOperator, ReproducingKernel, build_hankel,
                     min_singular, reproducing_kernel)
from .inverse import (ReflectionInput, ReconstructionResult, dual_map,
                      finite_mass_test, reconstruct, reconstruct_dual,
                      roundtrip_error, uniqueness_defect)
from .diagnostics import (A2Report, MatrixWeight, a2_quotient, doubling_check,
                          frak_h, identity_32_check, inequality_34_estimate,
                          q2e, theorem04_panel, weighted_projection_norm)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
