//! Numerical laboratory for weighted curvature integrals of hypersurfaces in
//! hyperbolic space and for higher-order masses of rotationally symmetric
//! asymptotically hyperbolic metrics.

pub mod error;
pub mod flow;
pub mod hyperbolic;
pub mod hypersurface;
pub mod inequalities;
pub mod integrals;
pub mod quadrature;
pub mod rotmass;
pub mod symfunc;
pub mod tensor_kernel;
pub mod warped;

pub use error::{Error, Result};
