//! Complex alpha-fractional Brownian bridges
//! `dZ_t = -alpha Z_t/(T-t) dt + sigma dzeta_t`, driven by a complex
//! fractional Brownian motion `zeta = (B1 + i B2)/sqrt(2)`.
//!
//! The crate covers exact simulation of the driving noise, the explicit
//! bridge solution and an Euler cross-check, least-squares estimation of
//! `alpha`, closed-form second moments and limit-law scales built from a
//! complex Gamma function, the complex-ratio law `CR(s)`, and low-order
//! complex Hermite chaos identities.
//!
//! Numerical code is generic over [`Real`] (`f32`, `f64`); the `*64`
//! aliases below fix `f64`. The Monte Carlo drivers work in `f64`.

pub mod bridge;
pub mod chaos;
pub mod error;
pub mod estimate;
pub mod gauss;
pub mod limitlaw;
pub mod quad;
pub mod scalar;
pub mod special;

pub use error::{Error, Result};
pub use num_complex::Complex;
pub use scalar::Real;

pub use bridge::{bridge_euler, bridge_exact, omega_path, scaled_y_path, BridgePaths};
pub use chaos::{hermite_eval, hermite_poly, mc_chaos_checks, BiPolynomial, HermiteIndex};
pub use estimate::{
    classify_case, lse_continuous, lse_discrete, normalized_error, run_consistency_experiment,
    run_limit_experiment, simulate_g, ExperimentConfig, LimitCase, McSummary,
};
pub use gauss::{
    fbm_covariance, inner_product_high_h, inner_product_low_h, sample_complex_fbm, sample_fbm_cholesky,
    sample_fbm_circulant, ComplexPath, RealPath, SeedSpec, TimeGrid,
};
pub use limitlaw::{cr_density, cr_marginal_density, cr_radial_cdf, cr_sample, ks_statistic, CrLaw};
pub use special::{cgamma, cr_scale, omega_terminal_second_moment, ModelParams};

pub type Complex64 = Complex<f64>;
pub type Complex32 = Complex<f32>;
pub type ModelParams64 = ModelParams<f64>;
pub type ModelParams32 = ModelParams<f32>;
pub type TimeGrid64 = TimeGrid<f64>;
pub type TimeGrid32 = TimeGrid<f32>;
pub type RealPath64 = RealPath<f64>;
pub type ComplexPath64 = ComplexPath<f64>;
pub type ComplexPath32 = ComplexPath<f32>;
pub type BridgePaths64 = BridgePaths<f64>;
pub type BridgePaths32 = BridgePaths<f32>;
pub type CrLaw64 = CrLaw<f64>;
