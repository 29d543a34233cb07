//! The perturbed half space `Ω = {x_3 > h(x')}` and its boundary `Γ`.
//!
//! Sign conventions used throughout the crate: `d` is positive in `Ω`, `∇d`
//! points into `Ω`, and the unit normal `n = -∇d = (∇'h, -1)/ω` on `Γ`.

mod boundary;
mod extension;
mod grid;
mod halfspace;

pub use boundary::{BoundaryFunction, GraphFunction, Profile, GAUSSIAN_SUPPORT_WIDTHS};
pub use extension::{extend_field, extend_field_c1, reflect_normal_odd};
pub use grid::{BoxField, BoxGrid};
pub use halfspace::{cutoff_profile, PerturbedHalfSpace, Projection};

/// A point of `R³`.
pub type Point = [f64; 3];
