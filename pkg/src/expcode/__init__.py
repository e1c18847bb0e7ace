"""Expansion coding for the additive exponential noise channel."""

from .expansion import (
    BernoulliProfile,
    BitWord,
    ExponentialSpec,
    LevelRange,
    dequantize,
    ks_distance,
    level_profile,
    mgf_reference,
    profile_mean,
    quantize,
    sample_expansion,
)
from .infotheory import (
    DomainError,
    aen_capacity,
    bernoulli_convolve,
    binary_entropy,
    bsc_rate,
    db_to_linear,
    linear_to_db,
)
from .rates import (
    ChannelSpec,
    GapCertificate,
    InputChoice,
    PreconditionError,
    RateBreakdown,
    ShapedInput,
    effective_noise_profile,
    entropy_bounds,
    gap_certificate,
    input_profile,
    optimal_input_spec,
    rate_carryover_as_noise,
    rate_carryover_decoded,
)
from .simulator import SimConfig, SimMode, SimReport, empirical_mi, genie_strip_carries, simulate

__version__ = "0.1.0"
