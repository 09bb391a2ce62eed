//! Super-frame data-collection simulator for energy-harvesting sensor
//! networks, with a fairness-aware link scheduler, three reference
//! schedulers, and an exact small-instance optimiser.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod energy;
pub mod error;
pub mod exact;
pub mod io;
pub mod model;
pub mod scalar;
pub mod sched;
pub mod series;
pub mod sim;

pub use error::{Error, Result};
pub use scalar::{Field, Scalar};

/// Floating-point scalar used by the simulator and command-line tools.
pub type Real = f64;
/// Exact rational scalar used by the small-instance solver.
pub type Exact = num_rational::Ratio<i128>;

pub type Config = sim::SimConfig<Real>;
pub type Record = sim::RunRecord<Real>;
pub type Instance = exact::ExactInstance<Exact>;
