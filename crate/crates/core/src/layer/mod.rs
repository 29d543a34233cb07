//! Boundary layer potentials on `Γ = {x_n = h(x')}`.
//!
//! Every operator is a quadrature over the `y'` lattice of a
//! [`SurfaceQuadrature`], with adaptive subdivision near the target.

mod potentials;
mod quadrature;
mod trace;

pub use potentials::TraceNorms;
pub use quadrature::{QuadratureOptions, SurfaceQuadrature};
pub use trace::{fit_order, IdentityCheck, JumpStudy, TraceReport};
