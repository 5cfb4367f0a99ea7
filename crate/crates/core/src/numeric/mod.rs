//! Scalar abstraction plus the extended-precision and automatic-differentiation
//! number types the kernels are instantiated with.

mod dd;
mod dual;
pub mod fd;
mod roots;
mod scalar;

pub use dd::DoubleDouble;
pub use dual::{Dual, Jet2};
pub use roots::{bisect_root, RootError};
pub use scalar::Scalar;
