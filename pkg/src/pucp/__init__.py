"""Numerical laboratory for quantitative unique continuation of planar
p-Laplace equations."""

from .grid import (
    DiskGrid,
    RealField,
    ComplexField,
    VectorField2,
    make_disk_grid,
    wirtinger_derivatives,
    norm_on_disc,
)
from .fieldio import read_field, write_field
from .singular import make_plan, cauchy_transform, beurling_transform, quadrature_oracle
from .solver import PLaplaceProblem, SolveReport, solve_dirichlet, mollify_drift
from .manufactured import manufactured_instance
from .beltrami import beltrami_constants, complex_gradient_F, reduce_solution, quasiregularity_check
from .analysis import three_circle_check, upper_harnack_check, holder_check_qc, vanishing_order_fit
from .experiments import (
    EstimateChain,
    StepRecord,
    Constant,
    RescaleParams,
    TraceInstance,
    caccioppoli_check,
    trudinger_exp_integral,
    trace_lower_bound,
    rescale_bourgain_kenig,
    landis_infsup,
    sucp_contradiction_test,
)

__version__ = "0.1.0"

__all__ = [
    "DiskGrid", "RealField", "ComplexField", "VectorField2", "make_disk_grid",
    "wirtinger_derivatives", "norm_on_disc",
    "read_field", "write_field",
    "make_plan", "cauchy_transform", "beurling_transform", "quadrature_oracle",
    "PLaplaceProblem", "SolveReport", "solve_dirichlet", "mollify_drift", "manufactured_instance",
    "beltrami_constants", "complex_gradient_F", "reduce_solution", "quasiregularity_check",
    "three_circle_check", "upper_harnack_check", "holder_check_qc", "vanishing_order_fit",
    "EstimateChain", "StepRecord", "Constant", "RescaleParams", "TraceInstance",
    "caccioppoli_check", "trudinger_exp_integral", "trace_lower_bound",
    "rescale_bourgain_kenig", "landis_infsup", "sucp_contradiction_test",
]
