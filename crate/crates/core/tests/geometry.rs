use std::f64::consts::PI;

use approx::assert_relative_eq;
use captree_core::geometry::{Body, ParamBody3, Shape3, SupportBody2, DEFAULT_GRID};
use proptest::prelude::*;

fn planar(seed: u64, r0: f64) -> Body {
    SupportBody2::random_smooth(seed, r0, DEFAULT_GRID).into()
}

fn ellipsoid(a: f64, b: f64, c: f64) -> Body {
    ParamBody3::ellipsoid([a, b, c]).unwrap().into()
}

fn surface_radius_bound_holds(body: &Body) {
    let n = body.dim();
    let sr = body.surface_radius();
    assert!(sr <= body.diameter() / 2.0 * (1.0 + 1e-9), "Kubota fails for {n}D body");
    assert!(sr <= body.mean_width() / 2.0 * (1.0 + 1e-9), "Chakerian fails for {n}D body");
    assert!(body.mean_width() <= body.diameter() * (1.0 + 1e-9));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mean_width_is_minkowski_linear(s1 in 0u64..1000, s2 in 0u64..1000, t in 0.0f64..3.0) {
        let a = planar(s1, 1.0);
        let b = planar(s2, 0.6);
        let sum = a.minkowski_sum(&b, t).unwrap();
        let expect = a.mean_width() + t * b.mean_width();
        prop_assert!((sum.mean_width() - expect).abs() <= 1e-10 * expect);
    }

    #[test]
    fn planar_radius_chain(seed in 0u64..10_000) {
        surface_radius_bound_holds(&planar(seed, 1.0));
    }

    #[test]
    fn solid_radius_chain(a in 1.0f64..3.0, rb in 0.3f64..1.0, rc in 0.3f64..1.0) {
        let b = a * rb;
        let c = b * rc;
        surface_radius_bound_holds(&ellipsoid(a, b, c));
    }

    #[test]
    fn gauss_bonnet_in_the_plane(seed in 0u64..10_000) {
        let k = planar(seed, 1.3).integral_mean_curvature(1).unwrap();
        prop_assert!((k - 2.0 * PI).abs() <= 1e-6 * 2.0 * PI);
    }

    #[test]
    fn willmore_on_smooth_bodies(seed in 0u64..1000, a in 1.0f64..3.0, rb in 0.3f64..1.0) {
        let p = planar(seed, 1.0);
        prop_assert!(p.mean_curvature_power_integral(1.0).unwrap() >= 2.0 * PI * (1.0 - 1e-9));
        let e = ellipsoid(a, a * rb, a * rb * 0.7);
        prop_assert!(e.mean_curvature_power_integral(2.0).unwrap() >= 4.0 * PI * (1.0 - 1e-9));
    }

    #[test]
    fn support_is_translation_covariant(seed in 0u64..1000, vx in -2.0f64..2.0, vy in -2.0f64..2.0, th in 0.0f64..std::f64::consts::TAU) {
        let a = planar(seed, 1.0);
        let t = a.translated(&[vx, vy]);
        let u = [th.cos(), th.sin()];
        let lhs = t.support(&u).unwrap();
        let rhs = a.support(&u).unwrap() + vx * u[0] + vy * u[1];
        prop_assert!((lhs - rhs).abs() < 1e-9);
    }
}

#[test]
fn ball_equalities() {
    let b: Body = SupportBody2::ball([0.3, -0.1], 1.7, DEFAULT_GRID).unwrap().into();
    assert_relative_eq!(b.mean_width(), 3.4, max_relative = 1e-12);
    assert_relative_eq!(b.diameter(), 3.4, max_relative = 1e-9);
    assert_relative_eq!(b.surface_radius(), 1.7, max_relative = 1e-12);
    let s: Body = ParamBody3::ball([0.0, 1.0, 0.0], 0.8).unwrap().into();
    assert_relative_eq!(s.mean_width(), 1.6, max_relative = 1e-9);
    assert_relative_eq!(s.diameter(), 1.6, max_relative = 1e-9);
    assert_relative_eq!(s.volume_radius(), 0.8, max_relative = 1e-12);
}

/// Area of the parallel body of an ellipsoid, integrated independently over
/// the normal sphere: `∫ (r1 + t)(r2 + t) dω` with the radii of curvature
/// written through the support function `h(ν) = |Dν|`, `D = diag(a, b, c)`.
fn offset_area_oracle(ax: [f64; 3], t: f64) -> f64 {
    let m = 400;
    let mut total = 0.0;
    for i in 0..m {
        let z = -1.0 + (i as f64 + 0.5) * 2.0 / m as f64;
        for j in 0..2 * m {
            let phi = (j as f64 + 0.5) * PI / m as f64;
            let rho = (1.0 - z * z).sqrt();
            let nu = [rho * phi.cos(), rho * phi.sin(), z];
            let h = ((ax[0] * nu[0]).powi(2) + (ax[1] * nu[1]).powi(2) + (ax[2] * nu[2]).powi(2)).sqrt();
            // r1 r2 = (abc)²/h⁴; r1 + r2 is the trace of the support Hessian.
            let g = (ax[0] * ax[1] * ax[2]).powi(2) / h.powi(4);
            let trace = (ax[0].powi(2) + ax[1].powi(2) + ax[2].powi(2)
                - ((ax[0].powi(2) * nu[0]).powi(2) + (ax[1].powi(2) * nu[1]).powi(2) + (ax[2].powi(2) * nu[2]).powi(2)) / (h * h))
                / h;
            total += (g + t * trace + t * t) * (2.0 / m as f64) * (PI / m as f64);
        }
    }
    total
}

#[test]
fn steiner_area_matches_parallel_body() {
    let ax = [2.0, 1.5, 1.0];
    let e = ellipsoid(ax[0], ax[1], ax[2]);
    assert_relative_eq!(offset_area_oracle(ax, 0.0), e.surface_area(), max_relative = 1e-4);
    for t in [0.25, 1.0, 4.0] {
        let steiner = e.steiner_area(t).unwrap();
        assert_relative_eq!(steiner, offset_area_oracle(ax, t), max_relative = 1e-2);
        let offset = e
            .minkowski_sum(&ParamBody3::ball([0.0; 3], 1.0).unwrap().into(), t)
            .unwrap();
        assert_relative_eq!(steiner, offset.surface_area(), max_relative = 1e-2);
    }
}

/// `Δb` at distance `t` outside the body is `Σ κ_i/(1 + tκ_i)`.
fn check_distance_laplacian(body: &Body, t: f64, every: usize) {
    let n = body.dim();
    let q = body.curvature_quadrature().unwrap();
    let ks = q.principal_curvatures.clone().unwrap();
    let step = 1e-2;
    let d = |y: &[f64]| body.signed_distance(y).unwrap();
    for i in (0..q.len()).step_by(every) {
        let x: Vec<f64> = (0..n).map(|k| q.points[i][k] + t * q.normals[i][k]).collect();
        let mut lap = 0.0;
        for k in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += step;
            xm[k] -= step;
            lap += (d(&xp) - 2.0 * d(&x) + d(&xm)) / (step * step);
        }
        let expect: f64 = ks[i].iter().map(|k| k / (1.0 + t * k)).sum();
        assert!((lap - expect).abs() < 0.02 * expect, "Δb = {lap}, expected {expect}");
    }
}

#[test]
fn distance_laplacian_matches_curvature() {
    check_distance_laplacian(&ellipsoid(2.0, 1.5, 1.0), 0.1, 97);
    check_distance_laplacian(&planar(7, 1.0), 0.1, 53);
}

#[test]
fn rotation_mean_is_a_valid_body() {
    let e = ParamBody3::ellipsoid([2.0, 1.0, 0.5]).unwrap();
    let r = nalgebra::Rotation3::from_euler_angles(0.3, -0.2, 1.1).into_inner();
    let mean = e.rotation_mean(&[(0.5, nalgebra::Matrix3::identity()), (0.5, r)]).unwrap();
    assert!(matches!(mean.shape, Shape3::Combination(_)));
    let body: Body = mean.into();
    // Mean width is rotation invariant and Minkowski linear.
    assert_relative_eq!(body.mean_width(), Body::from(e.clone()).mean_width(), max_relative = 1e-6);
}
