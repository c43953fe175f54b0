//! Variational p-capacity of convex bodies and the geometric radii around it.
//!
//! The crate is organised by subsystem:
//!
//! - [`geometry`]: planar support-function bodies and parametric solids, with
//!   every purely geometric quantity (support, width, area, curvature
//!   integrals, signed distance, Gauss-map pushforward).
//! - [`capacity`]: the p-equilibrium potential on a body-fitted exterior mesh,
//!   the energy and flux routes to the capacity, and closed-form comparisons.
//! - [`radius`]: the chain of radius inequalities and the curvature sandwich.
//! - [`yau`]: the functionals `∫_A h - pcap(A)` (and the surface/volume
//!   variants), their first variation and a projected ascent maximizer.
//! - [`adm`]: scalar curvature and ADM mass of radial graphs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adm;
pub mod capacity;
pub mod error;
pub mod geometry;
pub mod numeric;
pub mod radius;
pub mod yau;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use capacity::{
    ball_capacity, barrier_profile, boundary_gradient, capacity, gehring_upper_bound,
    solve_equilibrium, BarrierSide, CapacityResult, GridOptions, PotentialField,
};
pub use error::{Error, Result};
pub use geometry::{Body, BodySpec, ParamBody3, Shape3, SupportBody2, SurfaceQuadrature};
pub use radius::{RadiusReport, SandwichRecord};
pub use yau::{MassDensity, Objective, OptimState};
