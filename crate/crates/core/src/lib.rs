//! q-calculus Volterra LMS adaptive filtering.
//!
//! The crate is organized bottom-up:
//!
//! - [`volterra`]: second-order kernels, regressor expansion, the scaling
//!   diagonal `S`.
//! - [`adapt`]: the q-VLMS and VLMS update rules with operation counters,
//!   and the step-size bound.
//! - [`theory`]: Gaussian autocorrelation, the matrix `A`, the mean
//!   weight-error recursion and the Wiener optimum.
//! - [`experiment`]: channel simulation, Monte-Carlo averaging, metrics and
//!   the two evaluation protocols.
//!
//! ```
//! use qvlms::adapt::{FilterState, QParams};
//! use qvlms::volterra::{expand_regressor, RegressorMode};
//!
//! let u = expand_regressor(&[0.5, -1.0, 2.0], RegressorMode::Orthonormalized)?;
//! let qp = QParams::uniform(5.0, u.len())?;
//! let mut filter = FilterState::new(u.len(), 0.01)?;
//! let e = filter.qvlms_step(u.values(), 1.0, &qp)?;
//! assert_eq!(e, 1.0);
//! assert_eq!(filter.mul_count(), 3 * 9 + 1);
//! # Ok::<(), qvlms::Error>(())
//! ```

pub mod adapt;
mod error;
pub mod experiment;
pub mod theory;
pub mod volterra;

pub use error::{Error, Result};
