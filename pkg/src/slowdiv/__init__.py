"""Numerical toolkit for slow divergence integrals in regularized planar
piecewise-smooth systems: boundary classification, Filippov sliding,
improper divergence integrals at two-folds, the slow relation function and
its entry-exit orbits, Minkowski dimension estimation, cyclicity
prediction, and stiff simulation of the regularized flow.
"""

__version__ = "0.1.0"

from .canard import (
    AssumptionReport,
    CanardSetup,
    CheckItem,
    CyclicityPrediction,
    MultiplicityFit,
    OrbitSequence,
    check_assumptions,
    connection_endpoints,
    generate_orbit,
    make_canard_setup,
    multiplicity_of_I,
    orbit_from_map,
    predict_cyclicity,
    sdi_I,
    setup_from_model,
    slow_relation_G,
    slow_relation_G_inverse,
)
from .errors import (
    BracketError,
    CrossingRegionError,
    DivergentIntegralError,
    NoReturnError,
    NormalFormError,
    NotOnBoundaryError,
    NumericalError,
    SlowdivError,
    ValidationError,
)
from .fractal import (
    BoxCountFit,
    DimensionFit,
    box_dimension_2d,
    dim_from_multiplicity,
    dim_sequence,
    multiplicity_from_dim,
    neighborhood_measure_1d,
    synthetic_spiral,
)
from .models import (
    LoadedModel,
    MODEL_SCHEMA,
    TuneResult,
    builtin_names,
    canonical_model,
    degenerate_two_fold_model,
    load_model,
    save_model,
    tangency_model,
    tune_double_zero,
    tune_simple_zero,
)
from .regularizers import (
    Regularizer,
    RegularizerReport,
    make_arctan_regularizer,
    make_custom_regularizer,
    make_tanh_regularizer,
    regularizer_by_name,
    verify_regularizer,
)
from .sdi import (
    SdiResult,
    e_weight,
    fixed_node_sdi,
    invariance_report,
    rescaled_divergence_crosscheck,
    sdi_regular_segment,
    sdi_split_sum,
    sdi_to_tangency,
    sdi_to_two_fold,
    two_fold_integrand,
)
from .simulate import (
    Crossing,
    LimitCycleReport,
    SweepResult,
    Trajectory,
    find_limit_cycles,
    flow_regularized,
    return_map,
    saddle_node_sweep,
    sliding_layer_speed,
    spiral_trajectory,
)
from .system import (
    BoundaryClassification,
    BoundaryTag,
    Diffeo,
    PwsSystem,
    Rect,
    SlidingSegment,
    TwoFoldReport,
    TwoFoldType,
    VectorField,
    boundary_data,
    classify_boundary_point,
    classify_two_fold,
    det_z,
    filippov_sliding_vf,
    is_normal_form,
    lie_derivative,
    pseudo_equilibria,
    pullback_system,
    scale_system,
    tau,
    time_reversed,
)

__all__ = [name for name in dir() if not name.startswith("_")]
