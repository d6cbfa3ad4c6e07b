"""Alpha-fractal perturbations of continuous functions, with classical and
fractal approximation error bounds checked numerically."""

from .core import (
    ConvergenceError,
    DegreeExhaustionError,
    Interval,
    InvariantError,
    Partition,
    SampledFunction,
    ScalingVector,
    build_affine_maps,
    locate_subinterval,
    sup_distance,
    sup_norm,
)
from .spaces import (
    PERIODIC,
    Bernstein,
    ComposeWith,
    Explicit,
    MultiplyByProfile,
    RationalTrig,
    TrigPoly,
    bernstein_apply,
    jackson_kernel,
    modulus_of_continuity,
    power_map,
    quadratic_profile,
    varma_apply,
)
from .fractal import (
    FractalResult,
    FractalSpec,
    alpha_fractal,
    evaluate_at,
    fractal_operator_apply,
    node_values,
    self_referential_residual,
)
from .dimension import box_count_estimate, dimension_report, solve_box_dimension
from .approx import (
    fractal_minimax_bound,
    minimax_rational,
    minimax_rational_trig,
    minimax_trig,
    nonneg_fractal_approx,
)
from .report import Check
from .seeds import get_seed

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Bernstein",
    "Check",
    "ComposeWith",
    "ConvergenceError",
    "DegreeExhaustionError",
    "Explicit",
    "FractalResult",
    "FractalSpec",
    "Interval",
    "InvariantError",
    "MultiplyByProfile",
    "PERIODIC",
    "Partition",
    "RationalTrig",
    "SampledFunction",
    "ScalingVector",
    "TrigPoly",
    "alpha_fractal",
    "bernstein_apply",
    "box_count_estimate",
    "build_affine_maps",
    "dimension_report",
    "evaluate_at",
    "fractal_minimax_bound",
    "fractal_operator_apply",
    "get_seed",
    "jackson_kernel",
    "locate_subinterval",
    "minimax_rational",
    "minimax_rational_trig",
    "minimax_trig",
    "modulus_of_continuity",
    "node_values",
    "nonneg_fractal_approx",
    "power_map",
    "quadratic_profile",
    "self_referential_residual",
    "solve_box_dimension",
    "sup_distance",
    "sup_norm",
    "varma_apply",
]
