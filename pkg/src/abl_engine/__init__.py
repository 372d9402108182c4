"""Probability rules for pre- and post-selected quantum systems.

Finite-dimensional states and projector-valued observables, the two-time
(ABL) rule alongside the one-time Born rule, the rival Kastner rule, the
decomposition identity with its validity conditions, an interposition
comparison, a product-rule checker, and a seeded Monte Carlo verifier that
reproduces it all as relative frequencies.
"""

__version__ = "0.1.0"

from .core import (
    MAX_DIM,
    NORM_TOL,
    RANK_TOL,
    ZERO_PROB_TOL,
    DensityOperator,
    Observable,
    Projector,
    StateVector,
    basis_state,
    born_prob,
    born_prob_pure,
    inner,
    luders_update,
    observable_from_json,
    observable_to_json,
    projector_from_span,
    state_from_json,
    state_to_json,
    trivial_observable,
)
from .ensemble import (
    EnsembleStats,
    TrialOutcome,
    estimate_abl,
    estimate_interposition_effect,
    run_trial,
    trial_stream,
)
from .errors import (
    DegeneratePostObservable,
    DegenerateSpan,
    DimensionMismatch,
    EngineError,
    ImpossibleOutcome,
    ImpossiblePostSelection,
    InvalidDirection,
    NoAcceptedTrials,
    NonCommutingObservables,
    OrthogonalPrePost,
    ParseError,
    UnknownOutcomeLabel,
    ValidationError,
)
from .rules import (
    COND_TOL,
    DecompositionReport,
    OutcomeDecomposition,
    ProbabilityDistribution,
    ProductRuleReport,
    SelectionContext,
    WeightAssignment,
    abl,
    abl_trivial_reduction,
    decomposition_check,
    interposition_inequality,
    kastner,
    marginal_with_Q,
    product_rule_check,
    sequential_prob,
)
from .scenarios import (
    SCENARIOS,
    DecompositionCase,
    ExpectedValue,
    ScenarioBundle,
    decomposition_counterexample,
    product_rule_scenario,
    spin_half,
    three_box,
    three_hole,
)

__all__ = [
    "__version__",
    "MAX_DIM",
    "NORM_TOL",
    "RANK_TOL",
    "ZERO_PROB_TOL",
    "COND_TOL",
    "StateVector",
    "DensityOperator",
    "Projector",
    "Observable",
    "basis_state",
    "trivial_observable",
    "inner",
    "projector_from_span",
    "born_prob",
    "born_prob_pure",
    "luders_update",
    "state_to_json",
    "state_from_json",
    "observable_to_json",
    "observable_from_json",
    "SelectionContext",
    "ProbabilityDistribution",
    "WeightAssignment",
    "OutcomeDecomposition",
    "DecompositionReport",
    "ProductRuleReport",
    "sequential_prob",
    "marginal_with_Q",
    "abl",
    "abl_trivial_reduction",
    "kastner",
    "decomposition_check",
    "interposition_inequality",
    "product_rule_check",
    "TrialOutcome",
    "EnsembleStats",
    "trial_stream",
    "run_trial",
    "estimate_abl",
    "estimate_interposition_effect",
    "ScenarioBundle",
    "ExpectedValue",
    "three_box",
    "three_hole",
    "spin_half",
    "product_rule_scenario",
    "SCENARIOS",
    "DecompositionCase",
    "decomposition_counterexample",
    "EngineError",
    "ValidationError",
    "ParseError",
    "DimensionMismatch",
    "DegenerateSpan",
    "ImpossibleOutcome",
    "UnknownOutcomeLabel",
    "ImpossiblePostSelection",
    "OrthogonalPrePost",
    "DegeneratePostObservable",
    "NonCommutingObservables",
    "InvalidDirection",
    "NoAcceptedTrials",
]
