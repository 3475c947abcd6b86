//! Sharp constants of multilinear integral operators with homogeneous kernels,
//! Grand Lebesgue Space norms, and the bounds that connect them.
//!
//! The numerical core is generic over the [`Scalar`] type (`f32` or `f64`);
//! the aliases at the crate root fix it to `f64`, which is what the command
//! line front end uses.

pub mod beta;
pub mod cli;
pub mod config;
pub mod error;
pub mod expr;
pub mod gls;
pub mod kernel;
pub mod optimize;
pub mod quadrature;
pub mod scalar;
pub mod special;
pub mod sup;
pub mod tail;
pub mod theta;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Kernel = kernel::HomogeneousKernel<f64>;
pub type Estimate = quadrature::IntegralEstimate<f64>;
pub type ExponentVector = theta::ExponentVector<f64>;
pub type ThetaEstimate = theta::ThetaEstimate<f64>;
pub type GeneratingFunction = gls::GeneratingFunction<f64>;
pub type TestFunction = gls::TestFunction<f64>;
pub type GlsNorm = gls::GlsNorm<f64>;
pub type InequalityReport = verify::InequalityReport<f64>;
pub type SharpnessProbe = verify::SharpnessProbe<f64>;
pub type BetaPoint = beta::BetaPoint<f64>;
pub type BetaCurve = beta::BetaCurve<f64>;
pub type CertifyReport = beta::CertifyReport<f64>;
