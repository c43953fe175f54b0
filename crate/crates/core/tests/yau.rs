use std::f64::consts::PI;

use approx::assert_relative_eq;
use captree_core::capacity::{ball_capacity, GridOptions};
use captree_core::geometry::{Body, ParamBody3, SupportBody2, DEFAULT_GRID};
use captree_core::yau::{
    attainment_check, el_residual, evaluate_f, first_variation, maximize, FunctionalOptions, MassDensity,
    MaximizeOptions, Objective, SearchOptions,
};
use proptest::prelude::*;

const P: f64 = 1.5;

fn pcap() -> Objective {
    Objective::Pcap { p: P }
}

fn disc(c: [f64; 2], r: f64) -> Body {
    SupportBody2::ball(c, r, DEFAULT_GRID).unwrap().into()
}

/// `F` of a centred disc of radius `r` for the planar Gaussian bump, exact.
fn disc_oracle(a: f64, s: f64, r: f64) -> f64 {
    2.0 * PI * a * s * s * (1.0 - (-r * r / (2.0 * s * s)).exp()) - 2.0 * PI * r.sqrt()
}

/// Maximizer of [`disc_oracle`] by golden-section search on `[lo, hi]`.
fn oracle_radius(a: f64, s: f64, lo: f64, hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut x0, mut x1) = (lo, hi);
    while x1 - x0 > 1e-10 {
        let m1 = x1 - g * (x1 - x0);
        let m2 = x0 + g * (x1 - x0);
        if disc_oracle(a, s, m1) < disc_oracle(a, s, m2) {
            x0 = m1;
        } else {
            x1 = m2;
        }
    }
    0.5 * (x0 + x1)
}

#[test]
fn disc_matches_radial_oracle() {
    let h = MassDensity::gaussian(50.0, 1.0, &[]).unwrap();
    for r in [0.5, 1.0, 3.0] {
        let f = evaluate_f(&disc([0.0, 0.0], r), &h, &pcap(), &FunctionalOptions::default()).unwrap();
        assert_relative_eq!(f.mass, disc_oracle(50.0, 1.0, r) + 2.0 * PI * r.sqrt(), max_relative = 1e-6);
        assert_relative_eq!(f.penalty, 2.0 * PI * r.sqrt(), max_relative = 1e-2);
    }
}

#[test]
fn ball_matches_radial_oracle() {
    let h = MassDensity::gaussian(5.0, 0.8, &[]).unwrap();
    let r = 1.2;
    let body: Body = ParamBody3::ball([0.0; 3], r).unwrap().into();
    let opts = FunctionalOptions {
        grid: GridOptions {
            cells_per_min_width: Some(16.0),
            ..GridOptions::default()
        },
        ..FunctionalOptions::default()
    };
    let f = evaluate_f(&body, &h, &Objective::Pcap { p: 2.0 }, &opts).unwrap();
    // 4π ∫_0^r h(ρ) ρ² dρ by Simpson's rule.
    let m = 2000;
    let dr = r / m as f64;
    let mut mass = 0.0;
    for i in 0..=m {
        let rho = i as f64 * dr;
        let w = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        mass += w * h.radial(rho) * rho * rho;
    }
    mass *= 4.0 * PI * dr / 3.0;
    assert_relative_eq!(f.mass, mass, max_relative = 1e-6);
    assert_relative_eq!(f.penalty, 4.0 * PI * r, max_relative = 2e-2);
    let surface = evaluate_f(&body, &h, &Objective::Surface, &opts).unwrap();
    assert_relative_eq!(surface.value, mass - 4.0 * PI * r * r, max_relative = 1e-6);
    let volume = evaluate_f(&body, &h, &Objective::Volume, &opts).unwrap();
    assert_relative_eq!(volume.value, mass - 4.0 / 3.0 * PI * r.powi(3), max_relative = 1e-6);
}

#[test]
fn shrinking_balls_tend_to_zero() {
    let h = MassDensity::gaussian(10.0, 1.0, &[]).unwrap();
    for obj in [pcap(), Objective::Surface, Objective::Volume] {
        let mut last = f64::INFINITY;
        for r in [1e-2, 1e-4, 1e-6] {
            let f = evaluate_f(&disc([0.0, 0.0], r), &h, &obj, &FunctionalOptions::default()).unwrap();
            assert!(f.value.abs() < last);
            last = f.value.abs();
        }
        assert!(last < 1e-2);
    }
}

#[test]
fn zero_direction_has_zero_variation() {
    let a = disc([0.1, 0.0], 1.0);
    let point: Body = SupportBody2::new(vec![0.0; DEFAULT_GRID]).unwrap().into();
    let h = MassDensity::gaussian(3.0, 1.0, &[]).unwrap();
    for obj in [pcap(), Objective::Surface, Objective::Volume] {
        let fv = first_variation(&a, &point, &h, &obj, &FunctionalOptions::default()).unwrap();
        assert_eq!(fv.value, 0.0);
    }
}

#[test]
fn matched_eikonal_constant_is_stationary() {
    // (p-1)|∇u|^p = 0.5 on the unit disc.
    let a = disc([0.0, 0.0], 1.0);
    let h = MassDensity::Constant { value: 0.5 };
    for seed in 0..3 {
        let b: Body = SupportBody2::random_smooth(seed, 1.0, DEFAULT_GRID).into();
        let fv = first_variation(&a, &b, &h, &pcap(), &FunctionalOptions::default()).unwrap();
        assert!(fv.value.abs() <= 1e-2 * fv.mass_term.abs(), "{fv:?}");
    }
}

#[test]
fn euler_lagrange_closed_forms() {
    let one = MassDensity::Constant { value: 1.0 };
    let ball: Body = ParamBody3::ball([0.0; 3], 1.0).unwrap().into();
    let opts = FunctionalOptions::default();
    let r = el_residual(&ball, &one, &Objective::Pcap { p: 2.0 }, &opts).unwrap();
    assert!(r <= 2e-2, "pcap residual {r}");
    let r = el_residual(&ball, &one, &Objective::Surface, &opts).unwrap();
    assert!(r <= 1e-10, "surface residual {r}");
    let r = el_residual(&disc([0.0, 0.0], 2.0), &MassDensity::Constant { value: 2.0 }, &Objective::Volume, &opts).unwrap();
    assert!(r <= 1e-10, "volume residual {r}");
    let cube: Body = ParamBody3::cube(1.0).unwrap().into();
    assert!(matches!(
        el_residual(&cube, &one, &Objective::Surface, &opts),
        Err(captree_core::Error::DegenerateGaussMap(_))
    ));
}

#[test]
fn gaussian_maximizer_matches_oracle() {
    let (a, s) = (1000.0, 1.0);
    let h = MassDensity::gaussian(a, s, &[]).unwrap();
    let r_star = oracle_radius(a, s, 0.5, 20.0);
    assert!(disc_oracle(a, s, r_star) >= 0.0);
    let (att, traces) = attainment_check(&h, &pcap(), &SearchOptions::default()).unwrap();
    assert!(att.attained);
    let witness = att.witness.unwrap().build().unwrap();
    assert_relative_eq!(witness.mean_width() / 2.0, r_star, max_relative = 2e-2);
    let best = &traces[att.best_start.unwrap()];
    assert!(best.last().el_residual.unwrap() <= 5e-2);
    for t in &traces {
        for w in t.states.windows(2) {
            assert!(w[1].value >= w[0].value, "ascent decreased");
        }
        let l1 = h.l1_norm(2);
        for st in &t.states {
            let b = st.body.build().unwrap();
            let bound = l1 - ball_capacity(2, P, b.volume_radius()).unwrap();
            assert!(st.value <= bound * (1.0 + 1e-6));
        }
    }
    // Scaling h up keeps the problem attained.
    let one = SearchOptions {
        starts: 1,
        ..SearchOptions::default()
    };
    let (att2, _) = attainment_check(&h.scaled(2.0), &pcap(), &one).unwrap();
    assert!(att2.attained);
}

#[test]
fn low_amplitude_collapses() {
    let h = MassDensity::gaussian(0.01, 1.0, &[]).unwrap();
    let r = oracle_radius(0.01, 1.0, 1e-6, 20.0);
    assert!(disc_oracle(0.01, 1.0, r) < 0.0);
    let (att, traces) = attainment_check(&h, &pcap(), &SearchOptions::default()).unwrap();
    assert!(att.degenerate());
    assert!(att.witness.is_none());
    assert_eq!(att.value, 0.0);
    assert!(traces.iter().all(|t| t.collapsed()));
}

#[test]
fn optimum_is_a_fixed_point() {
    let (a, s) = (1000.0, 1.0);
    let h = MassDensity::gaussian(a, s, &[]).unwrap();
    let first = maximize(&h, &pcap(), &disc([0.0, 0.0], 4.0), &MaximizeOptions::default()).unwrap();
    let opt = first.witness().unwrap();
    let again = maximize(&h, &pcap(), &opt, &MaximizeOptions::default()).unwrap();
    let gain = again.last().value - again.states[0].value;
    assert!(gain <= 1e-6 * again.states[0].value.abs(), "gain {gain}");
    assert!(again.last().el_residual.unwrap() <= 5e-2);
}

#[test]
fn maximizer_is_translation_equivariant() {
    let h = MassDensity::gaussian(1000.0, 1.0, &[]).unwrap();
    let v = [3.0, -2.0];
    let opts = MaximizeOptions::default();
    let base = maximize(&h, &pcap(), &disc([0.3, 0.2], 3.0), &opts).unwrap();
    let moved = maximize(&h.translated(&v), &pcap(), &disc([3.3, -1.8], 3.0), &opts).unwrap();
    let (wb, wm) = (base.witness().unwrap(), moved.witness().unwrap());
    let (cb, cm) = (wb.center(), wm.center());
    let scale = wb.mean_width();
    for k in 0..2 {
        assert!((cm[k] - cb[k] - v[k]).abs() <= 1e-2 * scale);
    }
    assert_relative_eq!(wm.mean_width(), wb.mean_width(), max_relative = 1e-2);
    assert_relative_eq!(moved.last().value, base.last().value, max_relative = 1e-2);
}

/// `(F(A + tB) - F(A))/t` extrapolated to `t → 0`.
fn fd_variation(a: &Body, b: &Body, h: &MassDensity, obj: &Objective, t: f64) -> f64 {
    let opts = FunctionalOptions::default();
    let f0 = evaluate_f(a, h, obj, &opts).unwrap().value;
    let q = |t: f64| (evaluate_f(&a.minkowski_sum(b, t).unwrap(), h, obj, &opts).unwrap().value - f0) / t;
    2.0 * q(t / 2.0) - q(t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn first_variation_matches_differences(sa in 0u64..10_000, sb in 0u64..10_000, amp in 1.0f64..20.0) {
        let a: Body = SupportBody2::random_smooth(sa, 1.0, DEFAULT_GRID).into();
        let b: Body = SupportBody2::random_smooth(sb, 0.5, DEFAULT_GRID).into();
        let h = MassDensity::gaussian(amp, 1.0, &[0.2, -0.1]).unwrap();
        for obj in [pcap(), Objective::Surface, Objective::Volume] {
            let fv = first_variation(&a, &b, &h, &obj, &FunctionalOptions::default()).unwrap();
            let fd = fd_variation(&a, &b, &h, &obj, 1e-3);
            let scale = fv.mass_term.abs().max(fv.penalty_term.abs());
            prop_assert!((fv.value - fd).abs() <= 1e-3 * scale, "{obj:?}: {} vs {fd}", fv.value);
        }
    }

    #[test]
    fn functional_is_translation_invariant(seed in 0u64..10_000, vx in -3.0f64..3.0, vy in -3.0f64..3.0) {
        let a: Body = SupportBody2::random_smooth(seed, 1.0, DEFAULT_GRID).into();
        let h = MassDensity::gaussian(5.0, 1.0, &[]).unwrap();
        let opts = FunctionalOptions::default();
        let f = evaluate_f(&a, &h, &pcap(), &opts).unwrap();
        let g = evaluate_f(&a.translated(&[vx, vy]), &h.translated(&[vx, vy]), &pcap(), &opts).unwrap();
        prop_assert!((f.mass - g.mass).abs() <= 1e-9 * f.mass);
        prop_assert!((f.penalty - g.penalty).abs() <= 1e-6 * f.penalty);
    }
}
