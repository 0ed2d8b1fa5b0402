//! Exact uniform sampling of perfect matchings of dense nearly regular
//! bipartite graphs, and permanent estimation from the acceptance rate.
//!
//! The pieces fit together like this:
//!
//! - [`bounds`] builds the recursive g-factor table and computes upper
//!   bounds (Bregman and the slightly weaker recursive bound) and Van der
//!   Waerden-style lower bounds on the 0-1 permanent, all in log domain.
//! - [`sampler`] draws perfect matchings exactly uniformly by
//!   acceptance/rejection: column by column, rows are selected with
//!   probability equal to the ratio of the recursive bound of the reduced
//!   matrix to the bound of the current one, and the leftover mass rejects
//!   the pass.
//! - [`estimator`] turns the observed acceptance frequency into a permanent
//!   estimate with Chernoff-controlled accuracy.
//! - [`oracle`] provides ground truth for small instances: exact permanents
//!   by inclusion-exclusion, exhaustive matching enumeration, and a
//!   chi-square uniformity harness.
//! - [`gen`] produces reproducible regular and nearly regular test
//!   instances; [`io`] reads and writes the dense matrix text format.

pub mod bounds;
pub mod estimator;
pub mod gen;
pub mod instance;
pub mod io;
pub mod oracle;
pub mod sampler;

pub use instance::Instance;
