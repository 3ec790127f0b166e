//! Random controlled and rough differential equation reservoirs.
//!
//! The crate provides three random feature extractors for time series,
//! driven by piecewise-linear paths:
//!
//! * R-CDE: an Euler recursion with random matrices per input channel,
//! * RF-CDE: the same recursion driven by a random Fourier lift of the path,
//! * R-RDE: a log-ODE scheme advancing the state with random commutators
//!   evaluated on windowed log-signatures,
//!
//! together with the machinery to check their infinite-width limits
//! (truncated tensor algebra, Lyndon bases, signatures, Goursat PDE
//! signature kernels) and a ridge readout for classification.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the common double-precision instantiations.

pub mod error;
pub mod kernels;
pub mod paths;
pub mod readout;
pub mod reservoir;
pub mod rff;
pub mod scalar;
pub mod seed;
pub mod tensor;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Path64 = paths::Path<f64>;
pub type Path32 = paths::Path<f32>;
pub type Tensor64 = tensor::TruncatedTensor<f64>;
pub type Tensor32 = tensor::TruncatedTensor<f32>;
pub type LieElement64 = tensor::LieElement<f64>;
pub type RffSpec64 = rff::RffSpec<f64>;
pub type ReservoirState64 = reservoir::ReservoirState<f64>;
pub type ReservoirState32 = reservoir::ReservoirState<f32>;
