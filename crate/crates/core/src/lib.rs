//! Tensor-grid (PEPS) decompositions for tensor completion.

pub mod als;
pub mod error;
pub mod imaging;
pub mod mask;
pub mod pmac;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod tensor;
pub mod tg;
pub mod tt;

pub use error::{Error, Result};
pub use mask::{observed_objective, ObservationMask};
pub use report::SolveReport;
pub use scalar::Scalar;

pub type Tensor = tensor::DenseTensor<f64>;
pub type Tensor32 = tensor::DenseTensor<f32>;
pub type Mat = tensor::Matrix<f64>;
pub type Train = tt::TensorTrain<f64>;
pub type Grid = tg::TensorGrid<f64>;
pub type Grid32 = tg::TensorGrid<f32>;
