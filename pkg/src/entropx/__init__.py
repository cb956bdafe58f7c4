"""entropx: multiplicative Shannon entropy estimation via a probability-revealing
conditional sampling oracle, with explicit-table and CNF circuit-formula backends."""

__version__ = "0.1.0"

from .core import (
    EmptySupportError,
    Outcome,
    ProcOracle,
    ProcQueryResult,
    QueryLedger,
    ResourceCapError,
    Rng,
    log2,
)
from .estimator import (
    EstimationParams,
    EstimationResult,
    batch_size_generic,
    batch_size_qif,
    estimate_entropy,
    sample_est,
    trial_count,
)
from .dist_explicit import ExplicitDistribution, ExplicitOracle, exact_entropy
from .formula import (
    CircuitFormula,
    FormulaOracle,
    count_projected,
    exact_entropy_formula,
    parse_dimacs,
    sample_uniform_solution,
    validate_circuit_property,
)
from .bounds import (
    BoundReport,
    check_min_probability_bound,
    check_moment_bound,
    moments,
    tightness_construction,
)

__all__ = [
    "EmptySupportError", "Outcome", "ProcOracle", "ProcQueryResult", "QueryLedger",
    "ResourceCapError", "Rng", "log2",
    "EstimationParams", "EstimationResult", "batch_size_generic", "batch_size_qif",
    "estimate_entropy", "sample_est", "trial_count",
    "ExplicitDistribution", "ExplicitOracle", "exact_entropy",
    "CircuitFormula", "FormulaOracle", "count_projected", "exact_entropy_formula",
    "parse_dimacs", "sample_uniform_solution", "validate_circuit_property",
    "BoundReport", "check_min_probability_bound", "check_moment_bound", "moments",
    "tightness_construction",
]
