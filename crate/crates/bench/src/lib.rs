//! Fixed inputs shared by the benchmarks.

use captree_core::yau::FunctionalOptions;
use captree_core::{Body, GridOptions, MassDensity, ParamBody3, SupportBody2};

pub fn disk() -> Body {
    Body::Planar(SupportBody2::ball([0.0, 0.0], 1.0, 256).expect("valid disk"))
}

pub fn smooth_planar(seed: u64) -> Body {
    Body::Planar(SupportBody2::random_smooth(seed, 1.0, 256))
}

pub fn ellipsoid() -> Body {
    Body::Solid(ParamBody3::ellipsoid([1.5, 1.0, 0.75]).expect("valid axes"))
}

pub fn ball3() -> Body {
    Body::Solid(ParamBody3::ball([0.0; 3], 1.0).expect("valid ball"))
}

pub fn grid() -> GridOptions {
    GridOptions::default()
}

pub fn functional_options() -> FunctionalOptions {
    FunctionalOptions::default()
}

pub fn gaussian() -> MassDensity {
    MassDensity::gaussian(1000.0, 1.0, &[0.0, 0.0]).expect("valid density")
}
