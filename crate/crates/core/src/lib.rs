//! Arbitrary-precision computation of the Stieltjes constants γₙ.
//!
//! The pipeline has three stages:
//!
//! 1. [`tabulation`]: evaluate the regularized zeta function
//!    `f(s) = ζ(s) − 1/(s−1)` (with `f(1) = γ`) on the grid `s = 1 + jε`.
//! 2. [`stieltjes::compute_alphas`]: alternating binomial differences
//!    `αₖ = Σⱼ (−1)ʲ C(k,j) f(1+jε)`, with the cutoff `k₀` past which no
//!    digit of `αₖ` survives the `2ᵏ` cancellation.
//! 3. [`stieltjes::gamma_n`]: `γₙ` as an exact Stirling-weighted sum of
//!    the `αₖ`, reporting only digits that the propagated error bound
//!    guarantees.
//!
//! Every numeric value is a [`BigReal`]: an MPFR float together with an
//! upper bound on its absolute error. The bounds are rigorous except for
//! the truncation tail of `γₙ` past `k₀`, which is estimated from the
//! decay of the last `αₖ`.

pub mod ak;
pub mod bernoulli;
pub mod bigreal;
pub mod decimal;
pub mod error;
pub mod oracles;
pub mod stieltjes;
pub mod tabulation;
pub mod zeta;

pub use bigreal::{bits_for_digits, BigReal, GUARD_DIGITS};
pub use error::{Error, Result};

/// Version string written into every artifact header.
pub const TOOL_VERSION: &str = concat!("stieltjes-core ", env!("CARGO_PKG_VERSION"));
