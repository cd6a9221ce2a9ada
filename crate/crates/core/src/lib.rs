//! Progressive transient photon beams.
//!
//! Renders time-resolved radiance in homogeneous participating media. Photon
//! random walks produce time-stamped beams, camera rays gather them with 1D or
//! 2D spatial kernels and a temporal kernel, and successive iterations are
//! averaged while the kernel bandwidths shrink.

// `!(x > 0.0)` style checks are there to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beam_map;
pub mod estimators;
pub mod film;
pub mod geometry;
pub mod integrator;
pub mod kernels;
pub mod math;
pub mod media;
pub mod photon;
pub mod progressive;
pub mod reference;
pub mod registry;
pub mod render;
pub mod rng;
pub mod scene;
pub mod spectrum;

pub use math::{Aabb, Ray, Vec3};
pub use media::{Medium, PhaseFunction, SPEED_OF_LIGHT};
pub use scene::Scene;
pub use spectrum::Spectrum;
