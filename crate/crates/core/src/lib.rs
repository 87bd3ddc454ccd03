//! Exact symbolic computation for the KP hierarchy.
//!
//! * [`ring`]: graded differential polynomial rings with exact rational
//!   coefficients, total/partial/variational derivatives, antiderivatives
//!   and substitutions.
//! * [`pdo`]: pseudo-differential operators with tracked truncation windows.
//! * [`kp`]: Lax flows, the `w` coordinates and the conserved-current table
//!   `R(a, b)`.
//! * [`recon`]: rebuilding the flow table `Q(a, b)` of a commuting hierarchy
//!   from `Q(2, 2)` by exact linear solves.
//! * [`checks`]: the cross-validation suite tying the two sides together.

pub mod checks;
pub mod error;
pub mod kp;
pub mod linalg;
pub mod pdo;
pub mod recon;
pub mod ring;

pub use error::{Error, Result};
