//! Helmholtz decomposition `v = v0 + ∇q` of square-integrable vector fields with
//! bounded mean oscillation on a perturbed half space `{x_n > h(x')}`.
//!
//! The crate is organised along the constructive pipeline:
//!
//! * [`geometry`]: the boundary graph, signed distance, projections, normal
//!   coordinates, cut-offs and the odd/even reflection of vector fields.
//! * [`kernels`]: closed forms for the fundamental solution of `-Δ` and the
//!   boundary kernels derived from it.
//! * [`norms`]: Fourier and Gagliardo realisations of `Ḣ^{±1/2}`, the harmonic
//!   lifting, and sampled `BMO` / `b^ν` estimators.
//! * [`layer`]: surface quadrature, single/double layer potentials, the
//!   boundary trace operator `S` and flux identities.
//! * [`neumann`]: smallness constants and the Neumann series for `(I - 2S)^{-1}`.
//! * [`pipeline`]: volume potential, normal trace, Neumann correction and the
//!   assembled decomposition.
//! * [`io`]: the on-disk field format used by the command line front-end.
//!
//! Only `n = 3` is wired through the geometry and the pipeline; the kernel
//! formulas in [`kernels`] are valid for every `n >= 3`.

// `!(x > y)` is how validation rejects NaN alongside out-of-range values, and
// component loops index several 3-vectors at once.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod fourier;
pub mod geometry;
pub mod io;
pub mod kernels;
pub mod layer;
pub mod neumann;
pub mod norms;
pub mod pipeline;
pub mod vec3;

pub use error::{Error, Result};
pub use geometry::{BoundaryFunction, BoxField, BoxGrid, PerturbedHalfSpace, Point, Profile};
pub use kernels::KernelContext;
pub use layer::{QuadratureOptions, SurfaceQuadrature, TraceReport};
pub use neumann::{NeumannOptions, NeumannSolution, SmallnessReport};
pub use norms::{BoundaryDensity, Lattice, NormLedger};
pub use pipeline::{DecompositionConfig, DecompositionResult};

/// Ambient dimension used by the geometry, quadrature and pipeline modules.
pub const DIM: usize = 3;
