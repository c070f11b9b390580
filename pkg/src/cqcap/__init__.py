"""Capacity of classical-quantum channels and a desk-scale random-coding laboratory."""

__version__ = "0.1.0"

from .capacity import CapacityResult, additivity_check, grid_search_capacity, optimize_prior
from .channel import (
    CQChannel,
    average_state,
    holevo_quantity,
    mutual_information,
    transition_probs,
    validate_channel,
    word_state,
)
from .coding import (
    Codebook,
    ErrorBoundBreakdown,
    SQMDecoder,
    average_error_probability,
    error_bound_eq17,
    sample_codebook,
    sqm_decoder,
)
from .errors import (
    ArgumentError,
    ConvergenceError,
    CQCapError,
    DegenerateDecoderError,
    ResourceError,
    ValidationError,
)
from .experiment import SimulationReport, monte_carlo_experiment, random_coding_bound
from .gram import gram_cross_check
from .operators import (
    ResolutionOfIdentity,
    SpectralDecomposition,
    Tolerances,
    gen_inv_sqrt,
    partial_trace,
    quantum_relative_entropy,
    spectral_decompose,
    tensor_product,
    von_neumann_entropy,
)
from .typical import (
    TypicalProjectorDescriptor,
    expected_word_typicality,
    typical_projector,
    typicality_mass,
    word_typical_projector,
)
