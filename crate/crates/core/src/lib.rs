//! Stable contract systems for two agents (Worker and Firm) whose
//! preferences are Plott choice functions over the ideals of a finite
//! contract poset.
//!
//! The discrete case, where every subset of contracts is a system, is the
//! poset with the empty order. Graduated contracts are disjoint chains.
//!
//! ```
//! use contract_stability::fixtures;
//!
//! let pr = fixtures::fix_ab();
//! let ext = pr.extremal_stable().unwrap();
//! assert_eq!(pr.poset().names(ext.s_max_w), ["a"]);
//! assert_eq!(pr.poset().names(ext.s_min_w), ["b"]);
//! ```

pub mod choice;
pub mod cli;
mod error;
pub mod fixtures;
pub mod oracle;
pub mod poset;
pub mod stability;
mod system;

pub use choice::{
    ChoiceFunction, Family, Law, PlottReport, PlottWitness, TableOptions, Validation,
};
pub use error::{Error, Names, Result};
pub use poset::{IdealLattice, Poset, DEFAULT_MAX_IDEALS};
pub use stability::{
    check_comparative, transfer, transfer_all, Classification, Comparison, Extremes,
    IterationTrace, LatticeOp, Problem, Round, SigmaOutcome, TraceKind,
};
pub use system::{System, MAX_ELEMENTS};
