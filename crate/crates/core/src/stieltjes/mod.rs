//! Stieltjes constants from a node table: alternating binomial sums of the
//! node values, then a Stirling-weighted recombination.

mod alphas;
mod gamma;
mod records;
mod stirling;

pub use alphas::{
    compute_alphas, compute_alphas_unchecked, load_alphas, read_alphas, save_alphas, write_alphas, AlphaSeries,
};
pub use gamma::{
    beta, gamma_all, gamma_exact, gamma_n, gamma_n_exact, load_gammas, read_gammas, save_gammas, write_gammas,
    GammaResult,
};
pub use stirling::{stirling_signed, StirlingTriangle};
