//! Exact AUC scoring and attacks against oracles that report it.
//!
//! * [`auc`]: exact pair-count AUC, tie-aware AUC, rank order.
//! * [`oracle`]: a simulated leaderboard holding hidden labels, with
//!   optional rounding, noise and query budgets.
//! * [`certainty`]: labels of extreme-ranked examples that a high AUC
//!   forces, given the class counts.
//! * [`posterior`]: per-example label posteriors conditioned on an exact
//!   AUC, by enumeration or by a pseudo-polynomial dynamic program.
//! * [`construction`]: explicit families of labelings sharing one AUC.
//! * [`sim`]: the synthetic probe-and-resubmit experiment.

pub mod auc;
pub mod certainty;
pub mod construction;
pub mod error;
pub mod oracle;
pub mod posterior;
pub mod sim;

pub use auc::{auc_exact, auc_with_ties, rank_order, Guesses, Labeling, RationalScore};
pub use certainty::{deduce_certain_labels, perfect_auc_shortcut, CertaintyResult};
pub use construction::{
    construct_labeling, enumerate_variants, lemma_ratio_check, lower_bound, ConstructionCase,
    ConstructionPlan,
};
pub use error::{Error, Result};
pub use oracle::{Oracle, OracleConfig, OracleResponse};
pub use posterior::{
    count_satisfying, posterior_brute_force, posterior_dp, ClassCounts, Method, PosteriorResult,
    ProbGuesses,
};
pub use sim::{aggregate, run_attack2_trial, run_sweep, train_logistic, SimConfig, SimRunRecord};
