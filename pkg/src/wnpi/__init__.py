"""Finite-dimensional white-noise engine for phase-space path integrals.

Time-discretized Gauss kernels and their T-transforms, generalized scaling
operators with the Wick-formula identities, the symmetric square root of the
free covariance, and the harmonic-oscillator propagator, all adjudicated by
an independent Gaussian-integration oracle.
"""

__version__ = "0.1.0"

from .errors import (
    CausticError,
    GridMismatchError,
    PinningConditionError,
    PreconditionError,
    ResourceGuardError,
    RouteDisagreementError,
    SingularOperatorError,
    SpecFormatError,
)
from .grid import PhaseFunction, TimeGrid, indicator, make_grid, pair_bilinear, volterra_A
from .opalg import (
    BlockOperator,
    det_power,
    det_rel,
    det_rel_power,
    free_N_inv,
    invert,
    kinetic_K,
    sqrt_R,
)
from .gausskernel import (
    GaussKernelSpec,
    GrotexReport,
    GrowthReport,
    PinningSpec,
    check_u_functional,
    generalized_expectation,
    grotex_check,
    normalized_exp_T,
    t_transform_donsker,
    t_transform_gauss,
)
from .scaling import (
    ChaosVector,
    TraceKernel,
    coherent_product,
    s_transform,
    sigma,
    sigma_coherent,
    sigma_dense,
    sigma_dual_S,
    trace_kernel,
)
from .oracle import (
    MagicReport,
    OracleProblem,
    gauss_integral_analytic,
    gauss_integral_mc,
    gauss_integral_quadrature,
    verify_magicformula,
    wick_eval,
    wick_eval_batch,
)
from .pathint import (
    PropagatorQuery,
    PropagatorValue,
    caustic_guard,
    free_integrand_T,
    ho_T_closed,
    ho_propagator,
    ho_spec,
    scaled_quadratic_T,
)
from .report import CheckRecord, RunReport
from .verify import oracle_corpus, run_suite

__all__ = [name for name in dir() if not name.startswith("_")]
