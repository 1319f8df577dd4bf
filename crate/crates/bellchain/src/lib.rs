//! Chained Bell measures for two-qubit states, and feasibility analysis of
//! signal-local prediction-box decompositions of the Born rule.
//!
//! The library computes the chained measure I_N two independent ways (density
//! matrix traces and a closed form), constructs the equally spaced scenarios
//! that drive I_N below any ε > 0 on the maximally entangled state, and asks
//! whether a hidden prediction index z could beat the Born marginals by ε
//! while staying signal-local, setting-independent, and consistent with the
//! quantum averages. The answer is computed, not assumed: by LP feasibility
//! over decompositions, by brute force over deterministic strategies, and by
//! Monte Carlo with a distribution-free certificate.
//!
//! Modules:
//! - [`quantum`]: states, planar projectors, Born probabilities.
//! - [`chained`]: I_N evaluation, scenario construction, local-model floor.
//! - [`decomposition`]: behavior boxes, decomposition predicates, the LP.
//! - [`experiment`]: sampling and empirical certification.
//! - [`cli`]: the `bellchain` command-line front end.

pub mod chained;
pub mod cli;
pub mod decomposition;
pub mod error;
pub mod experiment;
pub mod quantum;

pub use chained::{
    chained_value_closed_form, chained_value_of, chained_value_trace, equally_spaced_settings,
    local_deterministic_minimum, settings_for_epsilon, term_equal_last, term_unequal,
    BornSource, ChainPair, ChainedBellReport, JointSource, ScenarioSettings,
};
pub use decomposition::{
    advantage, averages_to_quantum, bkp_bound_check, check_no_conspiracy, check_no_signalling,
    construct_product_state_model, deterministic_factorization_check, identity_decomposition,
    lp_max_advantage, lp_max_advantage_with, AdvantageReport, BehaviorBox, DecompositionModel,
    LpAdvantage, LpOptions,
};
pub use error::{Error, Result};
pub use experiment::{
    estimate_chained, sample_rounds, EmpiricalCertificate, Schedule, TrialRecord,
};
pub use quantum::{
    decorrelation_check, joint_probability, marginal, povm_element, ComplexMatrix,
    EntangledPairState, MeasurementAngle,
};
