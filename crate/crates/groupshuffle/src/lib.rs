//! Group-calibrated partial shuffling for locally randomized data.
//!
//! A trusted shuffler receives locally randomized responses together with
//! public auxiliary information, assigns each record a similarity group,
//! builds a reference ordering that keeps groups contiguous, and shuffles by
//! a permutation drawn from a Mallows model whose dispersion is calibrated
//! to a privacy budget. The crate covers the full lifecycle:
//!
//! - [`perm`]: permutation algebra and rank distances,
//! - [`groups`]: group assignment, reference construction, widths,
//!   sensitivities, and [`groups::ShufflePlan`],
//! - [`mallows`]: exact Mallows probabilities and the insertion sampler,
//! - [`mechanism`]: plan execution,
//! - [`ldp`]: k-ary randomized response,
//! - [`audit`]: exhaustive small-instance privacy audits,
//! - [`preserve`]: subset-preservation utility analysis,
//! - [`eval`]: the inference-attack and learnability harness,
//! - [`data`]: dataset I/O and the synthetic clustered generator.
//!
//! See the `examples/` directory for one runnable walkthrough per
//! capability, and the `groupshuffle` binary for the same surface as a
//! command line.

pub mod audit;
pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod groups;
pub mod ldp;
pub mod mallows;
pub mod mechanism;
pub mod perm;
pub mod preserve;
pub mod seeds;

pub use error::{Error, Result};
pub use groups::{AuxInfo, GroupAssignment, Metric, RankDistance, ShufflePlan};
pub use perm::Permutation;
