"""Certified Brouwer-degree and injectivity analysis for polynomial maps."""

__version__ = "0.1.0"

from .polycore import (
    Interval,
    IntervalBox,
    Poly,
    PolyParseError,
    div_exact,
    parse_poly,
    poly_to_string,
)
from .mapforms import (
    FormWitness,
    KellerStatus,
    PolyMap,
    jacobian_det,
    jacobian_matrix,
    keller_check,
    realify,
    recognize_form,
)
from .fibersolve import (
    CertifiedRoot,
    ClearanceResult,
    FiberResult,
    SolverConfig,
    bezout_bound,
    boundary_clearance,
    solve_fiber,
)
from .degree import (
    Bump,
    DegreeResult,
    QuadratureConfig,
    bump_build,
    component_constancy_check,
    degree_integral,
    degree_signed_count,
    homotopy_constancy_check,
)
from .injectlab import (
    CollisionConfig,
    CollisionWitness,
    InjectivityReport,
    PipelineConfig,
    SignSurvey,
    SurveyBudget,
    collision_search,
    global_injectivity_probe,
    injectivity_pipeline,
    jacobian_sign_survey,
    origin_injectivity_cubic,
)

__all__ = [
    "Interval",
    "IntervalBox",
    "Poly",
    "PolyParseError",
    "div_exact",
    "parse_poly",
    "poly_to_string",
    "FormWitness",
    "KellerStatus",
    "PolyMap",
    "jacobian_det",
    "jacobian_matrix",
    "keller_check",
    "realify",
    "recognize_form",
    "CertifiedRoot",
    "ClearanceResult",
    "FiberResult",
    "SolverConfig",
    "bezout_bound",
    "boundary_clearance",
    "solve_fiber",
    "Bump",
    "DegreeResult",
    "QuadratureConfig",
    "bump_build",
    "component_constancy_check",
    "degree_integral",
    "degree_signed_count",
    "homotopy_constancy_check",
    "CollisionConfig",
    "CollisionWitness",
    "InjectivityReport",
    "PipelineConfig",
    "SignSurvey",
    "SurveyBudget",
    "collision_search",
    "global_injectivity_probe",
    "injectivity_pipeline",
    "jacobian_sign_survey",
    "origin_injectivity_cubic",
    "__version__",
]
