//! Finite-dimensional dynamical systems, transport plans and Wasserstein
//! distances between them.
//!
//! The crate represents classical Markov chains and quantum systems on direct
//! sums of full matrix blocks, builds the coupling/balance constraint systems
//! that define transport plans between two such systems, and minimizes the
//! quadratic coordinate cost over those plans (LP for classical pairs, a
//! splitting SDP solver in general). On top of the distances it computes
//! duals, KMS duals and reverses of systems, detailed-balance residuals, and
//! deviation bounds.

pub mod basis;
pub mod error;
pub mod finalg;
pub mod fixtures;
pub mod layout;
pub mod linalg;
pub mod optimize;
pub mod random;
pub mod rows;
pub mod systems;
pub mod transport;

pub use error::{QotError, Result};
