//! Determine the level of the weight-4 newform attached to a modular rigid
//! Calabi-Yau threefold from its bad primes and Frobenius traces.
//!
//! The level divides a bound built from per-prime exponent caps
//! ([`conductor`]). Candidate newforms at the divisors of that bound are
//! eliminated by comparing eigenvalues with traces ([`elimination`]), with a
//! mod-5 twist descent to shrink the 2-part of the bound when it is large,
//! and a surviving form can be certified up to the Sturm bound
//! ([`sturm_dim`]). Eigenvalues come from text datasets ([`newform_db`]).

pub mod arith;
pub mod conductor;
pub mod elimination;
pub mod error;
pub mod newform_db;
pub mod residual;
pub mod sturm_dim;

pub use conductor::{serre_bound, BoundTable};
pub use elimination::{identify, Conclusion, EliminationReport, Status, Verdict};
pub use error::{Error, Result};
pub use newform_db::{parse_db, Dataset, NewformRecord};
pub use residual::{ResidueTraces, TraceData};

/// Integer type used by everything above the generic arithmetic kernels.
pub type Scalar = i64;
pub type Factorization = arith::Factorization<Scalar>;
pub type UnitGroup = arith::UnitGroup<Scalar>;
