//! Planar convex bodies sampled through their support function on a uniform
//! angle grid `θ_k = 2πk/N`.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::SurfaceQuadrature;
use crate::error::{Error, Result};
use crate::numeric::golden_max;

pub const DEFAULT_GRID: usize = 720;

/// Convex body in ℝ² given by samples of its support function.
#[derive(Clone, Debug)]
pub struct SupportBody2 {
    h: Arc<Vec<f64>>,
    dh: Arc<Vec<f64>>,
    d2h: Arc<Vec<f64>>,
    spline: Arc<Vec<f64>>,
}

fn fft(values: &[f64], inverse: bool) -> Vec<Complex<f64>> {
    let n = values.len();
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    let plan = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    plan.process(&mut buf);
    buf
}

fn ifft_real(mut coeffs: Vec<Complex<f64>>) -> Vec<f64> {
    let n = coeffs.len();
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(n).process(&mut coeffs);
    coeffs.iter().map(|c| c.re / n as f64).collect()
}

fn wavenumber(m: usize, n: usize) -> f64 {
    if m <= n / 2 {
        m as f64
    } else {
        m as f64 - n as f64
    }
}

/// Spectral first and second derivatives of periodic samples.
fn spectral_derivatives(h: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = h.len();
    let c = fft(h, false);
    let d1: Vec<Complex<f64>> = c
        .iter()
        .enumerate()
        .map(|(m, &cm)| {
            if n.is_multiple_of(2) && m == n / 2 {
                Complex::new(0.0, 0.0)
            } else {
                cm * Complex::new(0.0, wavenumber(m, n))
            }
        })
        .collect();
    let d2: Vec<Complex<f64>> = c
        .iter()
        .enumerate()
        .map(|(m, &cm)| cm * -(wavenumber(m, n).powi(2)))
        .collect();
    (ifft_real(d1), ifft_real(d2))
}

/// Second-derivative coefficients of the periodic interpolating cubic spline.
/// The spline system is circulant, so it is diagonal in Fourier space.
fn periodic_spline(h: &[f64]) -> Vec<f64> {
    let n = h.len();
    let dt = 2.0 * PI / n as f64;
    let c = fft(h, false);
    let m: Vec<Complex<f64>> = c
        .iter()
        .enumerate()
        .map(|(k, &ck)| {
            let cs = (2.0 * PI * k as f64 / n as f64).cos();
            ck * (6.0 * (2.0 * cs - 2.0) / (dt * dt) / (4.0 + 2.0 * cs))
        })
        .collect();
    ifft_real(m)
}

impl SupportBody2 {
    /// Builds a body from support samples; rejects grids that fail discrete
    /// convexity `h_{k-1} + h_{k+1} - 2h_k + Δθ² h_k ≥ -ε`.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::input(format!(
                "support grid size must be even and at least 8, got {n}"
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("support values must be finite"));
        }
        let body = Self::new_unchecked(values);
        let eps = body.convexity_tolerance();
        if let Some((k, r)) = body
            .discrete_rho()
            .into_iter()
            .enumerate()
            .find(|(_, r)| *r < -eps)
        {
            return Err(Error::input(format!(
                "support samples are not convex at k = {k} (discrete h + h'' = {r:e})"
            )));
        }
        Ok(body)
    }

    pub(crate) fn new_unchecked(values: Vec<f64>) -> Self {
        let (dh, d2h) = spectral_derivatives(&values);
        let spline = periodic_spline(&values);
        Self {
            h: Arc::new(values),
            dh: Arc::new(dh),
            d2h: Arc::new(d2h),
            spline: Arc::new(spline),
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let dt = 2.0 * PI / n as f64;
        Self::new((0..n).map(|k| f(k as f64 * dt)).collect())
    }

    pub fn ball(center: [f64; 2], radius: f64, n: usize) -> Result<Self> {
        if radius <= 0.0 {
            return Err(Error::input("ball radius must be positive"));
        }
        Self::from_fn(n, |t| center[0] * t.cos() + center[1] * t.sin() + radius)
    }

    /// Ellipse with semi-axes `a`, `b`, the `a` axis rotated by `angle`.
    pub fn ellipse(center: [f64; 2], a: f64, b: f64, angle: f64, n: usize) -> Result<Self> {
        if a <= 0.0 || b <= 0.0 {
            return Err(Error::input("ellipse semi-axes must be positive"));
        }
        Self::from_fn(n, |t| {
            let s = t - angle;
            center[0] * t.cos() + center[1] * t.sin()
                + (a * a * s.cos().powi(2) + b * b * s.sin().powi(2)).sqrt()
        })
    }

    /// `h(θ) = r0 + Σ_m a_m cos(mθ) + b_m sin(mθ)`, `m = 1, 2, ...`.
    pub fn from_fourier(r0: f64, modes: &[(f64, f64)], n: usize) -> Result<Self> {
        Self::from_fn(n, |t| {
            r0 + modes
                .iter()
                .enumerate()
                .map(|(i, (a, b))| {
                    let m = (i + 1) as f64;
                    a * (m * t).cos() + b * (m * t).sin()
                })
                .sum::<f64>()
        })
    }

    /// Random smooth strictly convex body: Fourier modes up to order 6,
    /// resampled until `h + h'' ≥ 0.05 r0` everywhere.
    pub fn random_smooth(seed: u64, r0: f64, n: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let modes: Vec<(f64, f64)> = (1..=6)
                .map(|m| {
                    let scale = if m == 1 { 0.3 } else { 0.25 / (m * m) as f64 };
                    (
                        r0 * scale * rng.gen_range(-1.0..1.0),
                        r0 * scale * rng.gen_range(-1.0..1.0),
                    )
                })
                .collect();
            // ρ = r0 + Σ (1 - m²)(a_m cos + b_m sin), checked on a fine grid.
            let min_rho = (0..4 * n)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / (4 * n) as f64;
                    r0 + modes
                        .iter()
                        .enumerate()
                        .map(|(i, (a, b))| {
                            let m = (i + 1) as f64;
                            (1.0 - m * m) * (a * (m * t).cos() + b * (m * t).sin())
                        })
                        .sum::<f64>()
                })
                .fold(f64::INFINITY, f64::min);
            if min_rho >= 0.05 * r0 {
                return Self::from_fourier(r0, &modes, n).expect("generated body is convex");
            }
        }
    }

    pub fn grid_size(&self) -> usize {
        self.h.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.h
    }

    pub fn derivative(&self) -> &[f64] {
        &self.dh
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.grid_size() as f64
    }

    pub fn angle(&self, k: usize) -> f64 {
        k as f64 * self.dtheta()
    }

    fn convexity_tolerance(&self) -> f64 {
        1e-9 * self.h.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `(h_{k-1} + h_{k+1} - 2h_k)/Δθ² + h_k` on the grid.
    pub fn discrete_rho(&self) -> Vec<f64> {
        let n = self.grid_size();
        let dt2 = self.dtheta().powi(2);
        (0..n)
            .map(|k| {
                let hm = self.h[(k + n - 1) % n];
                let hp = self.h[(k + 1) % n];
                (hm + hp - 2.0 * self.h[k]) / dt2 + self.h[k]
            })
            .collect()
    }

    /// Radius of curvature `ρ = h + h''` (spectral).
    pub fn radius_of_curvature(&self) -> Vec<f64> {
        self.h.iter().zip(self.d2h.iter()).map(|(h, d)| h + d).collect()
    }

    pub fn min_radius_of_curvature(&self) -> f64 {
        self.radius_of_curvature()
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// Smooth and strictly convex at grid resolution.
    pub fn is_smooth(&self) -> bool {
        self.min_radius_of_curvature() > 1e-6 * self.h.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub(crate) fn require_smooth(&self) -> Result<Vec<f64>> {
        let rho = self.radius_of_curvature();
        let min = rho.iter().copied().fold(f64::INFINITY, f64::min);
        if !self.is_smooth() {
            return Err(Error::UnsupportedSmoothness(format!(
                "planar body has min radius of curvature {min:e}"
            )));
        }
        Ok(rho)
    }

    /// Support value at an arbitrary angle (periodic cubic spline).
    pub fn support_at(&self, theta: f64) -> f64 {
        let n = self.grid_size();
        let dt = self.dtheta();
        let x = theta.rem_euclid(2.0 * PI) / dt;
        let k = (x.floor() as usize) % n;
        let t = x - x.floor();
        let k1 = (k + 1) % n;
        let (m0, m1) = (self.spline[k], self.spline[k1]);
        (1.0 - t) * self.h[k]
            + t * self.h[k1]
            + dt * dt / 6.0 * (((1.0 - t).powi(3) - (1.0 - t)) * m0 + (t.powi(3) - t) * m1)
    }

    pub fn support(&self, direction: [f64; 2]) -> Result<f64> {
        let norm = direction[0].hypot(direction[1]);
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::input(format!(
                "support direction must be a unit vector (norm {norm})"
            )));
        }
        Ok(self.support_at(direction[1].atan2(direction[0])))
    }

    /// Boundary point with outer normal `e(θ_k)`: `h e + h' e'`.
    pub fn boundary_point(&self, k: usize) -> [f64; 2] {
        let t = self.angle(k);
        let (s, c) = t.sin_cos();
        [self.h[k] * c - self.dh[k] * s, self.h[k] * s + self.dh[k] * c]
    }

    pub fn minkowski_sum(&self, other: &SupportBody2, t: f64) -> Result<Self> {
        if t < 0.0 {
            return Err(Error::input("Minkowski scale must be nonnegative"));
        }
        if other.grid_size() != self.grid_size() {
            return Err(Error::input(format!(
                "support grids differ ({} vs {})",
                self.grid_size(),
                other.grid_size()
            )));
        }
        Ok(self.combine(other, t))
    }

    /// `h_A + t h_B` without sign restriction (used for directional perturbations).
    pub(crate) fn combine(&self, other: &SupportBody2, t: f64) -> Self {
        let values = self
            .h
            .iter()
            .zip(other.h.iter())
            .map(|(a, b)| a + t * b)
            .collect();
        Self::new_unchecked(values)
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self::new_unchecked(self.h.iter().map(|v| lambda * v).collect())
    }

    pub fn translated(&self, v: [f64; 2]) -> Self {
        let dt = self.dtheta();
        Self::new_unchecked(
            self.h
                .iter()
                .enumerate()
                .map(|(k, h)| {
                    let t = k as f64 * dt;
                    h + v[0] * t.cos() + v[1] * t.sin()
                })
                .collect(),
        )
    }

    /// Steiner point `(1/π) ∫ h(θ) e(θ) dθ`; always interior for non-degenerate bodies.
    pub fn steiner_point(&self) -> [f64; 2] {
        let dt = self.dtheta();
        let mut p = [0.0; 2];
        for (k, h) in self.h.iter().enumerate() {
            let t = k as f64 * dt;
            p[0] += h * t.cos();
            p[1] += h * t.sin();
        }
        [p[0] * dt / PI, p[1] * dt / PI]
    }

    pub fn perimeter(&self) -> f64 {
        self.h.iter().sum::<f64>() * self.dtheta()
    }

    /// Area `½∫h(h+h'')dθ = ½∫(h² - h'²)dθ`.
    pub fn area(&self) -> f64 {
        0.5 * self
            .h
            .iter()
            .zip(self.dh.iter())
            .map(|(h, d)| h * h - d * d)
            .sum::<f64>()
            * self.dtheta()
    }

    pub fn mean_width(&self) -> f64 {
        self.perimeter() / PI
    }

    pub fn diameter(&self) -> f64 {
        let n = self.grid_size();
        let half = n / 2;
        let (kbest, _) = (0..half)
            .map(|k| (k, self.h[k] + self.h[k + half]))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("grid is nonempty");
        let dt = self.dtheta();
        let t0 = kbest as f64 * dt;
        let width = |t: f64| self.support_at(t) + self.support_at(t + PI);
        let (_, w) = golden_max(width, t0 - dt, t0 + dt, 1e-10);
        w.max(self.h[kbest] + self.h[kbest + half])
    }

    /// `b_A(x) = sup_θ (x·e(θ) - h(θ))`, exact for convex bodies on both sides of ∂A.
    pub fn signed_distance(&self, x: [f64; 2]) -> f64 {
        let dt = self.dtheta();
        let g = |t: f64| x[0] * t.cos() + x[1] * t.sin() - self.support_at(t);
        let (kbest, gbest) = (0..self.grid_size())
            .map(|k| {
                let t = k as f64 * dt;
                (k, x[0] * t.cos() + x[1] * t.sin() - self.h[k])
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("grid is nonempty");
        let t0 = kbest as f64 * dt;
        let (_, refined) = golden_max(g, t0 - dt, t0 + dt, 1e-11);
        refined.max(gbest)
    }

    /// Boundary quadrature parametrized by the normal angle: points `y(θ_k)`,
    /// weights `ρ_k Δθ`, curvature `1/ρ_k`.
    pub fn curvature_quadrature(&self) -> Result<SurfaceQuadrature> {
        let rho = self.require_smooth()?;
        Ok(self.quadrature_with(&rho, 1))
    }

    /// Same parametrization, every `stride`-th grid angle.
    pub(crate) fn quadrature_with(&self, rho: &[f64], stride: usize) -> SurfaceQuadrature {
        let dt = self.dtheta() * stride as f64;
        let idx: Vec<usize> = (0..self.grid_size()).step_by(stride).collect();
        SurfaceQuadrature {
            dim: 2,
            points: idx
                .iter()
                .map(|&k| {
                    let p = self.boundary_point(k);
                    [p[0], p[1], 0.0]
                })
                .collect(),
            normals: idx
                .iter()
                .map(|&k| {
                    let t = self.angle(k);
                    [t.cos(), t.sin(), 0.0]
                })
                .collect(),
            weights: idx.iter().map(|&k| rho[k].max(0.0) * dt).collect(),
            principal_curvatures: Some(idx.iter().map(|&k| vec![1.0 / rho[k]]).collect()),
        }
    }

    /// Pushforward of `X dℋ¹` to the circle, binned into `bins` equal arcs.
    pub fn gauss_pushforward(&self, density: &[f64], bins: usize) -> Result<Vec<f64>> {
        let n = self.grid_size();
        if density.len() != n {
            return Err(Error::input(format!(
                "density has {} samples, grid has {n}",
                density.len()
            )));
        }
        if density.iter().any(|d| *d < 0.0) {
            return Err(Error::input("pushforward density must be nonnegative"));
        }
        let rho = self.radius_of_curvature();
        let min = rho.iter().copied().fold(f64::INFINITY, f64::min);
        if min <= 1e-9 * self.h.iter().fold(0.0f64, |m, v| m.max(v.abs())) {
            return Err(Error::DegenerateGaussMap(format!(
                "radius of curvature vanishes (min {min:e})"
            )));
        }
        let dt = self.dtheta();
        let mut out = vec![0.0; bins.max(1)];
        for k in 0..n {
            let b = ((k as f64 * dt) / (2.0 * PI) * bins as f64).floor() as usize % bins;
            out[b] += density[k] * rho[k] * dt;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ellipse_support_at_major_axis() {
        let e = SupportBody2::ellipse([0.0, 0.0], 2.0, 1.0, 0.0, DEFAULT_GRID).unwrap();
        assert_relative_eq!(e.support([1.0, 0.0]).unwrap(), 2.0, max_relative = 1e-12);
        assert!(e.support([1.0, 1.0]).is_err());
    }

    #[test]
    fn ellipse_area_perimeter_and_diameter() {
        let e = SupportBody2::ellipse([0.3, -0.2], 2.0, 1.0, 0.4, DEFAULT_GRID).unwrap();
        assert_relative_eq!(e.area(), 2.0 * PI, max_relative = 1e-10);
        assert_relative_eq!(e.diameter(), 4.0, max_relative = 1e-8);
        // Ramanujan-free check: perimeter of the (2,1) ellipse to 10 digits.
        assert_relative_eq!(e.perimeter(), 9.688_448_220_5, max_relative = 1e-10);
    }

    #[test]
    fn spline_interpolates_between_samples() {
        let e = SupportBody2::ellipse([0.0, 0.0], 2.0, 1.0, 0.0, 64).unwrap();
        let t: f64 = 0.123;
        let exact = (4.0 * t.cos().powi(2) + t.sin().powi(2)).sqrt();
        assert!((e.support_at(t) - exact).abs() < 1e-5);
        assert_relative_eq!(e.support_at(e.angle(5)), e.values()[5], max_relative = 1e-12);
    }

    #[test]
    fn nonconvex_samples_are_rejected() {
        let mut v = vec![1.0; 64];
        v[10] = 1.5;
        assert!(SupportBody2::new(v).is_err());
        assert!(SupportBody2::new(vec![1.0; 7]).is_err());
    }

    #[test]
    fn minkowski_requires_matching_grids() {
        let a = SupportBody2::ball([0.0, 0.0], 1.0, 64).unwrap();
        let b = SupportBody2::ball([0.0, 0.0], 1.0, 128).unwrap();
        assert!(a.minkowski_sum(&b, 1.0).is_err());
        let c = a.minkowski_sum(&a, 1.0).unwrap();
        assert_relative_eq!(c.values()[3], 2.0, max_relative = 1e-14);
    }

    #[test]
    fn random_bodies_respect_curvature_floor() {
        for seed in 0..5 {
            let b = SupportBody2::random_smooth(seed, 1.0, 360);
            assert!(b.min_radius_of_curvature() >= 0.05 - 1e-9);
        }
    }

    #[test]
    fn signed_distance_of_disc() {
        let d = SupportBody2::ball([1.0, 0.0], 1.0, 360).unwrap();
        assert_relative_eq!(d.signed_distance([1.0, 0.0]), -1.0, max_relative = 1e-9);
        assert_relative_eq!(d.signed_distance([4.0, 0.0]), 2.0, max_relative = 1e-9);
    }
}
