//! Partitioning of nonspecific Dempster–Shafer evidence.
//!
//! Evidences whose propositions may refer to any of several events are
//! grouped into subsets, one per event, by minimizing the metaconflict of the
//! partition. The number of events is inferred at the same time from a prior
//! distribution over it.
//!
//! ```
//! use metaconflict::{solve, DomainDistribution, Evidence, Frame, SolverOptions};
//!
//! let frame = Frame::with_event_count(["A", "B"], 2).unwrap();
//! let a = frame.focal(&["A"], &["E1", "E2"]).unwrap();
//! let b = frame.focal(&["B"], &["E1", "E2"]).unwrap();
//! let evidences = vec![
//!     Evidence::simple_support("x", a, 0.9).unwrap(),
//!     Evidence::simple_support("y", b, 0.9).unwrap(),
//! ];
//! let prior = DomainDistribution::new([(1, 0.5), (2, 0.5)]).unwrap();
//! let solution = solve(&evidences, &prior, &SolverOptions::default()).unwrap();
//! assert_eq!(solution.subset_count(), 2);
//! ```

pub mod cli;
pub mod corpus;
pub mod criterion;
pub mod error;
pub mod evidence;
pub mod optimizer;
pub mod oracle;
pub mod report;

pub use criterion::{
    domain_bound_excludes, domain_conflict, evaluate, metaconflict, plausibility, stability_margin,
    Breakdown, DomainDistribution, Partition, Stability,
};
pub use error::{Error, Result};
pub use evidence::{
    fold, precombine_specific, subset_conflict, CombinedState, Evidence, FocalElement, Frame, Shape,
};
pub use optimizer::{
    best_transfer, initial_partition, local_optimize, masses_without, rho, solve, solve_fixed,
    PartitionState, Solution, SolverOptions, TraceRecord,
};
pub use oracle::{brute_force_min_mcf, conflict_by_enumeration};
