//! Basic CCS with recursion (`0`, prefix, choice, `rec X._`) and its
//! behavioural theory under divergence-preserving branching bisimilarity.
//!
//! * [`syntax`]: parsing, printing, canonical forms, substitution, exposedness.
//! * [`semantics`]: the transition relation and finite reachable state spaces.
//! * [`lts`]: τ-reachability, divergence, lassos, quotients, `.aut` I/O.
//! * [`equivalence`]: deciders for ≈Δ and its rooted variant ≃Δ, plus
//!   verifiers for the relational transfer and divergence conditions.
//! * [`upto`]: bisimulation up to ≈Δ and the recursion-congruence pipeline.
//! * [`harness`]: random expressions, sound rewrites and test campaigns.
//! * [`cli`]: the `ccs-dpbb` command line.

pub mod cli;
pub mod equivalence;
pub mod error;
pub mod harness;
pub mod lts;
pub mod partition;
pub mod semantics;
pub mod syntax;
pub mod upto;

pub use equivalence::{Checker, Condition, Counterexample, Verdict};
pub use error::{CcsError, Result};
pub use lts::{Label, Lasso, Lts, StateId};
pub use partition::{Partition, Relation};
pub use syntax::{parse, print, Action, Expr, VarName};

/// Resource caps shared by state-space construction and lasso enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub state_cap: usize,
    pub lasso_cap: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { state_cap: 100_000, lasso_cap: 10_000 }
    }
}

pub const STATE_CAP_ENV: &str = "CCS_DPBB_STATE_CAP";
pub const LASSO_CAP_ENV: &str = "CCS_DPBB_LASSO_CAP";

impl Limits {
    /// Defaults overridden by `CCS_DPBB_STATE_CAP` / `CCS_DPBB_LASSO_CAP`.
    pub fn from_env() -> Self {
        let read = |key: &str, default: usize| {
            std::env::var(key).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(default)
        };
        let d = Limits::default();
        Limits { state_cap: read(STATE_CAP_ENV, d.state_cap), lasso_cap: read(LASSO_CAP_ENV, d.lasso_cap) }
    }
}
