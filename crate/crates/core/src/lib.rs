//! Long-memory linear processes and their nonlinear transforms.

pub mod error;
pub mod harness;
pub mod farima;
pub mod innovations;
pub mod memory_theory;
pub mod power_rank;
pub mod scalar;
pub mod series;
pub mod special;
pub mod spectral;
pub mod transforms;
pub mod verification;

pub use error::{Error, Result};
pub use farima::{FarimaSimulator, ProcessKind, ProcessSpec};
pub use innovations::{InnovationLaw, InnovationSpec};
pub use scalar::{Field, Real};
pub use series::Series;
pub use transforms::Transform;

pub type ProcessSpec64 = ProcessSpec<f64>;
pub type Series64 = Series<f64>;
pub type MemoryClass64 = memory_theory::MemoryClass<f64>;

/// Exact rationals for the memory classification boundaries.
pub type Rational = num_rational::Ratio<i64>;
pub type ExactMemoryClass = memory_theory::MemoryClass<Rational>;
