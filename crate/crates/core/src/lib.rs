//! Core algorithms for Monte-Carlo polarity initialization of a CDCL solver.
//!
//! The crate is `no_std` and only needs `alloc`. It contains:
//!
//! * [`cnf`]: the clause data model, random 3-CNF generation and syntactic
//!   simplification under partial assignments.
//! * [`features`]: the ten instance features used by the classifier, including
//!   the LP-relaxation slack statistics (solved by [`features::lp`]).
//! * [`logit`]: a small logistic regression with standardization and full-batch
//!   gradient descent.
//! * [`cdcl`]: a CDCL solver with watched literals, VSIDS, first-UIP learning,
//!   Luby restarts and a pluggable initial polarity.
//! * [`polarity`]: Monte-Carlo scoring of literals with the classifier, which
//!   yields per-variable polarity hints.
//! * [`backbone`]: backbone computation and scoring of hints against it.
//!
//! Text formats, timing and the command line live in the companion `mcsat`
//! crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod backbone;
pub mod cdcl;
pub mod cnf;
pub mod features;
pub mod logit;
pub mod polarity;
pub mod rng;

pub use backbone::{compute_backbone, hint_accuracy, BackboneReport, BackboneStatus, HintScore};
pub use cdcl::{check_model, solve, SolveResult, SolverConfig, Stats, Verdict};
pub use cnf::{
    apply_assignment, generate_random_3cnf, Clause, Formula, Lit, PartialAssignment, Residual,
    SimplifyOutcome, Var,
};
pub use features::{extract_features, FeatureVector};
pub use logit::{Dataset, LogisticModel, Standardizer, TrainConfig};
pub use polarity::{compute_hints, McConfig, PolarityHints};
