//! Finite-dimensional ∗-algebra kernel.
//!
//! Algebras are direct sums of full complex matrix blocks; abelian algebras
//! are the all-1×1 case. Elements, faithful states with their modular data,
//! superoperators between element spaces, couplings (transport plans), the
//! channel↔plan correspondence and the three dual constructions all live
//! here.
//!
//! Commutant convention: an element of the commutant `B′` is stored as an
//! element `c` of `B` and read through `π′`, the right-multiplication
//! representation `X ↦ X cᵀ` (blockwise). Couplings pair as
//! `ω(a ⊗ π′(c)) = Σ_ij tr(Ω_ij (a_i ⊗ c_j))`, which keeps `Ω` a positive
//! semidefinite density matrix; the second marginal of `Ω` is then `ρ_νᵀ`.

mod algebra;
mod coupling;
mod duals;
mod element;
mod state;
mod superop;

pub use algebra::BlockAlgebra;
pub use coupling::{channel_of_plan, delta_state, plan_of_channel, Coupling};
pub use duals::{dual_channel, dual_map_raw, kms_dual, kms_dual_raw, theta_kms_dual, verify_reversing};
pub use element::AlgElement;
pub use state::FaithfulState;
pub use superop::{SuperOp, SuperOpFlags};
