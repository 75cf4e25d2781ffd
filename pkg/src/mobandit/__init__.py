"""Multi-objective bandit toolkit.

Vector-reward environments with paired noise streams, preference
scalarizations and their gap tables, Thompson-sampling policies (vector
posterior and scalarized baseline), regret bounds with Monte-Carlo
validation, a deterministic experiment harness with CSV/JSON export and
figure rendering, and an HTTP elicitation service for interactive or
scripted preference sessions.
"""
from .analysis import (
    BoundQuery,
    c_of_d,
    default_validation_queries,
    lemma1_bound,
    mc_validate_bound,
    prop1_bound,
    thm1_bound,
)
from .environments import EnvironmentSpec, NoiseStream, sample_outcome
from .geometry import Action, ActionSet, ObjectiveVector, dominates, pareto_front
from .harness import (
    MVN_TS,
    SCALARIZED_BASELINE,
    ExperimentConfig,
    ExperimentResult,
    RegretCurve,
    export,
    pareto_regret,
    run_experiment,
)
from .policies import (
    PosteriorState,
    initial_state,
    mvn_ts_select,
    posterior_params,
    sample_posterior_matrix,
    update,
)
from .preferences import (
    ChebyshevPreference,
    EpsilonConstraintPreference,
    LinearPreference,
    WeightedLpPreference,
    certify_radii,
    gap_table,
    theorem_radii,
)

__version__ = "0.1.0"

__all__ = [
    "Action",
    "ActionSet",
    "BoundQuery",
    "ChebyshevPreference",
    "EnvironmentSpec",
    "EpsilonConstraintPreference",
    "ExperimentConfig",
    "ExperimentResult",
    "LinearPreference",
    "MVN_TS",
    "NoiseStream",
    "ObjectiveVector",
    "PosteriorState",
    "RegretCurve",
    "SCALARIZED_BASELINE",
    "WeightedLpPreference",
    "c_of_d",
    "certify_radii",
    "default_validation_queries",
    "dominates",
    "export",
    "gap_table",
    "initial_state",
    "lemma1_bound",
    "mc_validate_bound",
    "mvn_ts_select",
    "pareto_front",
    "pareto_regret",
    "posterior_params",
    "prop1_bound",
    "run_experiment",
    "sample_outcome",
    "sample_posterior_matrix",
    "theorem_radii",
    "thm1_bound",
    "update",
]
