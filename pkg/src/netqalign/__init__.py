"""Multiple network alignment by spectral ranking on Kronecker product
graphs, with a numerically exact phase-estimation simulator."""

from .errors import (
    BreakdownError,
    ConditioningError,
    DegenerateInputError,
    NetqalignError,
    NumericalError,
    ParseError,
    SizeError,
    ValidationError,
)
from .graphs import (
    KRONECKER_CAP,
    STOCHASTIC_TOL,
    Graph,
    KroneckerOperator,
    StochasticMatrix,
    adjacency,
    degrees,
    format_matrix,
    google_matrix,
    isorank_operator,
    kron_apply,
    kronecker,
    load_edge_list,
    normalize,
    parse_matrix,
)
from .ranking import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    AlignmentPair,
    IterationReport,
    RankVector,
    alignment_csv,
    blondel_similarity,
    blondel_similarity_vector,
    extract_alignment,
    hits,
    isorank,
    isorank_series,
    molecular_similarity,
    pagerank,
    power_iteration,
    prior_vector,
    stochastic_hits,
)
from .qpe import (
    DEFAULT_KAPPA,
    CostEstimate,
    PhaseEstimationResult,
    Propagator,
    QuantumState,
    SpectralDecomposition,
    StochasticSuccessReport,
    conditional_csv,
    conditional_eigenvector,
    cost_model,
    nearest_phase_code,
    phase_code_weights,
    phase_estimate,
    phases_csv,
    propagator,
    qft,
    qft_matrix,
    resolution_condition,
    spectral_decompose,
    success_probabilities,
    unitarity_defect,
    verify_stochastic_success,
)
from .experiments import (
    CSV_HEADER,
    ENV_THREADS,
    AlignmentCheck,
    ExperimentRecord,
    align_pipeline,
    gap_precision_experiment,
    metadata_json,
    random_doubly_stochastic,
    records_csv,
    success_experiment,
    wishart,
)

__version__ = "0.1.0"
