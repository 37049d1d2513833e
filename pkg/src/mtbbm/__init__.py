"""Laboratory for extremes of irreducible multitype branching Brownian motion.

Exact event-driven simulation, the size-biased spine construction, a solver
for the associated reaction-diffusion system, and point-process estimators
for the extremal limit objects.
"""

from .errors import (
    DomainError,
    DomainTooSmallError,
    InsufficientSamplesError,
    ModelError,
    MtbbmError,
    NumericalError,
    ResourceLimitError,
    StabilityError,
)
from .models import (
    ModelSpec,
    ValidationReport,
    branching_matrix,
    linearization_constant,
    mean_matrix,
    model_a,
    model_b,
    model_c,
    offspring_gf,
    validate_model,
    varphi,
    varphi_linearization_gap,
)
from .bridge import bridge_barrier_estimate, log_barrier_curve, reflection_rectangle_prob
from .extremal import (
    DecorationBank,
    PointPattern,
    additive_martingale,
    conditional_exceedance,
    derivative_martingale,
    dppp_mean_functional,
    dppp_sample,
    estimate_C_infinity,
    extremal_point_pattern,
    gap_point_pattern,
    laplace_functional,
    limit_law_compare,
    m_infinity_samples,
    rescaled_mass,
    shifted_pattern,
    test_functions,
)
from .fkpp import (
    GridSolution,
    InitialCondition,
    constant_ic,
    custom_ic,
    cv_integral,
    front_level_position,
    heaviside_ic,
    laplace_ic,
    solve,
    traveling_wave_profile,
    truncated_ic,
    typed_heaviside_ic,
)
from .reports import EstimatorReport
from .rng import generator_for, replicate_seed, splitmix64
from .simulate import (
    Snapshot,
    max_position,
    min_position,
    run_replicates,
    simulate,
    simulate_max,
    simulate_replicate,
    typed_max,
)
from .spectral import SpectralData, front, front_plus, perron_frobenius, spectral_data
from .spine import (
    SpineGenerator,
    SpinePath,
    many_to_one_check,
    simulate_spine,
    size_biased_offspring,
    spine_generator,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
