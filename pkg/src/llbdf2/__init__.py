"""BDF2 projection schemes for the Landau-Lifshitz equation.

Second-order linear schemes for dm/dt = -m x Lap m + alpha Lap m
+ alpha |grad m|^2 m with |m| = 1, on cell-centered grids over the unit
box with homogeneous Neumann walls.  Each step costs one
constant-coefficient Helmholtz solve, diagonalized exactly by a DCT, plus
a pointwise normalization.  The ``verify`` module reproduces the schemes'
second-order convergence against a closed-form forced solution and fuzzes
the discrete inequalities underpinning the error analysis.
"""

from .mesh import (
    GridSpec,
    ScalarField,
    VectorField,
    build_grid,
    extend_neumann,
    sample_on_grid,
    unit_deviation,
)
from .discrete_ops import (
    FieldNorms,
    GradientField,
    averaged_gradient,
    cell_average,
    cross,
    forward_gradient,
    grad_norm_sq,
    inner,
    laplacian,
    norms,
)
from .helmholtz import HelmholtzPlan, apply_operator, dct2_forward, dct2_inverse, plan, solve
from .stepper import (
    Algorithm,
    ProjectionError,
    SolverConfig,
    StepperState,
    extrapolate,
    first_step,
    project,
    run,
    step,
)
from .verify import (
    ConvergenceReport,
    ErrorResult,
    LemmaReport,
    ManufacturedSolution,
    SweepRow,
    check_inverse_and_sobolev,
    check_lemma_cross_gradient,
    check_projection_stability,
    check_two_level_projection,
    convergence_study,
    default_manufactured,
    error_norms,
    stability_comparison,
)

__version__ = "0.1.0"
