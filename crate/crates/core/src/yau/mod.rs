//! Yau-type functionals `F(A) = ∫_A h - Φ(A)` with `Φ` the p-capacity, the
//! boundary measure or the volume; evaluation, first variation,
//! Euler–Lagrange residuals and a projected ascent maximizer.

mod density;
mod functional;
mod optimizer;

pub use density::MassDensity;
pub use functional::{
    el_residual, evaluate_f, first_variation, mass_integral, FirstVariation, FunctionalOptions, FunctionalValue,
    Objective,
};
pub use optimizer::{
    attainment_check, initial_bodies, maximize, Attainment, MaximizeOptions, OptimState, SearchOptions, StartSummary,
    Termination, Trace,
};
