"""Growth bounds and spectral bounds for semigroups on graded sequence spaces."""
from .exceptions import (
    ConfigError,
    GrowthBoundError,
    HorizonTooShort,
    HypothesisViolated,
    LevelCapTooSmall,
    LevelExceedsTruncation,
    NonCausalGenerator,
    OrbitDivergent,
    Singular,
    SlopeFitUnstable,
    UnsupportedFamily,
)
from .graded_space import RecalibrationRule, SeminormFamily, TruncatedVector, seminorm_eval
from .operators import (
    INF,
    CausalOperator,
    TruncatedMatrix,
    compose,
    diagonal,
    from_matrix,
    gamma_norm,
    identity,
    jordan2,
    mixed_level_norm,
    power,
    right_shift,
    truncate,
    universally_bounded_check,
    weighted_shift,
    zero,
)
from .semigroup import (
    GeneratorSpec,
    equicontinuity_order_check,
    evaluate,
    growth_bound_gamma,
    growth_bound_topological,
    semigroup_law_defect,
)
from .spectral import (
    AnalysisConfig,
    allan_bounded_check,
    combinatorial_bound_check,
    prop2_check,
    resolvent,
    resolvent_uniformity_check,
    shift_resolvent_power_apply,
    spectral_radius_profile,
    spectral_vs_growth_report,
    spectrum_scan,
)
from .estimators import GrowthBoundEstimator, SpectrumScanner, check_family, check_generator
from .scenarios import Scenario, get_scenario, random_scenarios, run_growth, run_spectrum, run_verify

__version__ = "0.1.0"
