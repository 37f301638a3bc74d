//! Special functions: Gamma family, Bessel K, hypergeometric series and their
//! large-argument expansions.

mod asymptotic;
mod bessel;
mod gamma;
mod hyper;
mod levin;

pub use asymptotic::{
    exponential_coefficients, hyp_2f3_asymptotic, hyp_3f4_asymptotic, asymptotic_3f4_rho, pfq_neg, pfq_neg_asymptotic, NegPfq,
    AsymptoticValue, ExpansionReading, PfqEval, PfqMethod,
};
pub use bessel::{bessel_k, bessel_k_scaled, ln_bessel_k};
pub use gamma::{
    beta_fn, gamma_fn, is_nonpositive_integer, ln_beta, ln_gamma_signed, log_gamma, pochhammer, pochhammer_split,
    rgamma, sin_pi,
};
pub use hyper::{hyp_pfq, PFQParams, SeriesControl, SeriesSum};
pub use levin::{levin_sum, levin_u};
