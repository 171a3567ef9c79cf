"""STL-robustness-maximizing trajectory planning for a reduced-order biped."""

from .channels import CHANNELS, Builtin, SignalSchema, check_builtin_gradient
from .formula import (
    AffineExpr,
    Always,
    And,
    Eventually,
    Formula,
    IndexWindow,
    Not,
    Or,
    Predicate,
    Until,
    WindowError,
    print_formula,
)
from .parser import ParseError, parse_formula
from .semantics import (
    eval_boolean,
    robustness,
    smooth_max,
    smooth_min,
    smooth_robustness,
    smooth_robustness_and_gradient,
    smooth_robustness_gradient,
    smoothing_error_bound,
)
from .trajectory import Trajectory
from .lipm import (
    AugmentedState,
    Control,
    LipmParams,
    SimResult,
    discrete_step_taylor,
    guard_value,
    lipm_flow_analytic,
    reset_map,
    simulate_hybrid,
)
from .riemannian import (
    DirectionBounds,
    Keyframe,
    NominalGait,
    RiemannianRegion,
    build_nominal_gait,
    default_region,
    keyframe_extract,
    riemannian_distances,
    riemannian_robustness,
    sigma,
    zeta,
)

__version__ = "0.1.0"
