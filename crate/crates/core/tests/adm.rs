use std::f64::consts::PI;

use approx::assert_relative_eq;
use captree_core::adm::{adm_boundary, lam_mass, penrose_check, scalar_curvature, GraphFunction, Profile};
use captree_core::GridOptions;
use proptest::prelude::*;

const RADII: [f64; 5] = [10.0, 20.0, 40.0, 80.0, 160.0];

/// ADM sphere integral of the Schwarzschild graph `f = √(8m(ρ - 2m))` from
/// the Cartesian integrand, with derivatives by central differences and a
/// midpoint rule in `(z, φ)`.
fn cartesian_adm(m: f64, r: f64) -> f64 {
    let f = |x: [f64; 3]| (8.0 * m * ((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt() - 2.0 * m)).sqrt();
    let h = 1e-3 * r;
    let shift = |x: [f64; 3], i: usize, d: f64| {
        let mut y = x;
        y[i] += d;
        y
    };
    let k = 60;
    let mut total = 0.0;
    for a in 0..k {
        let z = -1.0 + (a as f64 + 0.5) * 2.0 / k as f64;
        for b in 0..2 * k {
            let phi = (b as f64 + 0.5) * PI / k as f64;
            let s = (1.0 - z * z).sqrt();
            let x = [r * s * phi.cos(), r * s * phi.sin(), r * z];
            let g: Vec<f64> = (0..3).map(|i| (f(shift(x, i, h)) - f(shift(x, i, -h))) / (2.0 * h)).collect();
            let hess = |i: usize, j: usize| {
                (f(shift(shift(x, i, h), j, h)) - f(shift(shift(x, i, h), j, -h)) - f(shift(shift(x, i, -h), j, h))
                    + f(shift(shift(x, i, -h), j, -h)))
                    / (4.0 * h * h)
            };
            let lap = hess(0, 0) + hess(1, 1) + hess(2, 2);
            let q = 1.0 + g.iter().map(|v| v * v).sum::<f64>();
            let flux: f64 = (0..3)
                .map(|j| (lap * g[j] - (0..3).map(|i| hess(i, j) * g[i]).sum::<f64>()) * x[j] / r)
                .sum();
            total += flux / q * r * r * (2.0 / k as f64) * (PI / k as f64);
        }
    }
    total / (2.0 * 2.0 * 4.0 * PI)
}

#[test]
fn schwarzschild_mass_by_both_routes() {
    for m in [0.25, 0.5, 1.0] {
        let f = GraphFunction::schwarzschild(m).unwrap();
        let boundary = adm_boundary(&f, &RADII).unwrap();
        let lam = lam_mass(&f).unwrap();
        assert_relative_eq!(boundary.extrapolated, m, max_relative = 1e-2);
        assert_relative_eq!(lam.mass, m, max_relative = 1e-2);
        assert!((lam.mass - boundary.extrapolated).abs() <= 1e-2 * m);
        assert_relative_eq!(lam.boundary_term, 2.0 * m, max_relative = 1e-12);
        assert!(lam.bulk_term.abs() < 1e-8);
        assert_relative_eq!(cartesian_adm(m, 20.0), m, max_relative = 1e-2);
    }
}

#[test]
fn tabulated_schwarzschild_samples() {
    let m = 0.5;
    let radii: Vec<f64> = (0..400).map(|i| 1.05 + 0.05 * i as f64 * (1.0 + 0.02 * i as f64)).collect();
    let slopes = radii.iter().map(|r| (2.0 * m / (r - 2.0 * m)).sqrt()).collect();
    let mut bad: Vec<f64> = radii.iter().map(|r| (2.0 * m / (r - 2.0 * m)).sqrt()).collect();
    bad[0] = f64::INFINITY;
    assert!(GraphFunction::new(Profile::Tabulated { radii: radii.clone(), slopes: bad }, Some(1.2)).is_err());
    let f = GraphFunction::new(Profile::Tabulated { radii, slopes }, Some(1.2)).unwrap();
    let boundary = adm_boundary(&f, &[20.0, 30.0, 40.0, 60.0]).unwrap();
    assert_relative_eq!(boundary.extrapolated, m, max_relative = 1e-2);
    assert!(scalar_curvature(&f, [3.0, 0.0, 0.0]).unwrap().abs() < 1e-3);
}

#[test]
fn flat_profiles_have_no_curvature_or_mass() {
    let c = GraphFunction::new(Profile::Constant { value: 2.0 }, Some(1.0)).unwrap();
    let l = GraphFunction::new(Profile::Linear { slope: [0.3, -1.0, 0.5] }, Some(1.0)).unwrap();
    for f in [&c, &l] {
        for x in [[2.0, 0.0, 0.0], [1.0, 2.0, -3.0], [10.0, 5.0, 1.0]] {
            assert!(scalar_curvature(f, x).unwrap().abs() <= 1e-6);
        }
        assert!(adm_boundary(f, &RADII).unwrap().extrapolated.abs() <= 1e-6);
    }
    assert!(scalar_curvature(&c, [0.5, 0.0, 0.0]).is_err());
}

#[test]
fn decay_validator() {
    let slow = GraphFunction::new(Profile::Power { c: 1.0, a: 0.75 }, Some(1.0)).unwrap();
    assert!(!slow.is_asymptotically_flat());
    let fast = GraphFunction::new(Profile::Power { c: 1.0, a: 0.25 }, Some(1.0)).unwrap();
    assert!(fast.is_asymptotically_flat());
    let s = GraphFunction::schwarzschild(1.0).unwrap();
    assert!(s.is_asymptotically_flat());
    assert!(s.has_horizon());
    assert!(!fast.has_horizon());
}

#[test]
fn penrose_equality_at_the_horizon() {
    let coarse = GridOptions {
        cells_per_min_width: Some(16.0),
        ..GridOptions::default()
    };
    let mut previous = 0.0;
    for m in [0.25, 0.5, 1.0] {
        let f = GraphFunction::schwarzschild(m).unwrap();
        let rec = penrose_check(&f, &coarse, 1e-2).unwrap();
        assert!(rec.capacity_pass && rec.surface_pass);
        assert_relative_eq!(rec.surface_radius, rec.mass_radius, max_relative = 1e-2);
        assert_relative_eq!(rec.capacity_radius, rec.mass_radius, max_relative = 1e-2);
        assert_relative_eq!(rec.twice_mass, 2.0 * rec.mass, max_relative = 1e-15);
        assert!(rec.mass_radius > previous);
        previous = rec.mass_radius;
    }
    // Extra matter outside the horizon only raises the mass.
    let f = GraphFunction::new(Profile::Matter { m_inf: 1.0, delta: 0.2 }, None).unwrap();
    let rec = penrose_check(&f, &coarse, 1e-2).unwrap();
    assert!(rec.capacity_pass && rec.surface_pass);
    assert!(rec.surface_radius < rec.mass_radius);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn schwarzschild_is_scalar_flat(m in 0.1f64..2.0, d in 1e-3f64..50.0, th in 0.0f64..PI, ph in 0.0f64..2.0 * PI) {
        let f = GraphFunction::schwarzschild(m).unwrap();
        let r = 2.0 * m + d;
        let x = [r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos()];
        prop_assert!(scalar_curvature(&f, x).unwrap().abs() <= 1e-6);
    }

    #[test]
    fn matter_has_nonnegative_curvature_and_mass(m_inf in 0.2f64..2.0, frac in 0.0f64..0.3, d in 1e-2f64..20.0) {
        let f = GraphFunction::new(Profile::Matter { m_inf, delta: frac * m_inf }, None).unwrap();
        let r0 = f.inner().unwrap();
        prop_assert!(scalar_curvature(&f, [r0 + d, 0.0, 0.0]).unwrap() >= -1e-9);
        let lam = lam_mass(&f).unwrap();
        prop_assert!(lam.mass >= 0.0);
        prop_assert!((lam.mass - m_inf).abs() <= 1e-3 * m_inf);
    }
}
