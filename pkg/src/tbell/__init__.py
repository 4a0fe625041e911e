"""Temporal CHSH correlations for qubit channel pipelines.

Evaluate the two-observer, four-time Bell combination over arbitrary channel
pipelines, classify the channels involved, and search channel classes for
extremal values with a deterministic multi-start simplex optimizer.
"""

from .channels import (
    AffineChannel,
    CQChannelParams,
    ChannelError,
    DegenerateDraw,
    InvalidBloch,
    KrausRank2Params,
    NonTracePreserving,
    NotAChannel,
    canonical_channel,
    child_rng,
    compose,
    extremal_cptp,
    extremal_cq,
    from_choi,
    from_kraus,
    identity_channel,
    is_cptp,
    is_entanglement_breaking,
    is_unital,
    is_unitary,
    kraus_from_choi,
    kraus_normalized_channel,
    mix_channels,
    normalize,
    positivity_sampled,
    random_cptp,
    random_unit,
    replace_channel,
    rotation_channel,
    sample_unit_directions,
    to_choi,
    unit_vector,
    werner_channel,
)
from .scenario import (
    CorrelationSet,
    DivisibilityReport,
    EffectiveSettings,
    IndivisibleProcess,
    InvalidIndex,
    NotUnitary,
    RotatedFrame,
    TemporalScenario,
    bell_from_effective_settings,
    bell_indivisible,
    bell_rotated_frame,
    bell_value,
    conditional_rotation_process,
    correlation_oracle,
    correlations_closed_form,
    correlations_ebt,
    correlations_indivisible,
    correlations_oracle,
    effective_settings,
    hadamard_three_step,
    is_divisible,
    optimal_bob_bound,
    rotated_frame,
    validate_scenario,
)
from .optimize import (
    ALGEBRAIC_MAX,
    CLASSICAL_BOUND,
    TSIRELSON_BOUND,
    ChannelClass,
    InvalidSpec,
    OptimizationResult,
    OptimizationSpec,
    RestartRecord,
    optimize_bell,
    scan_canonical_e,
    scan_werner,
    verify_cq_alice_tsirelson,
    verify_ebt_bias,
    verify_table1,
)

__version__ = "0.1.0"
