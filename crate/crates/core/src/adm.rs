//! Scalar curvature and ADM mass of asymptotically flat graphs over `ℝ³ ∖ A°`.
//!
//! For a radial profile with `w = f'²/(1 + f'²)` the boundary integrand on
//! the coordinate sphere reduces to `m(r) = r^{n-2} w(r)/2` and the scalar
//! curvature to `R_f = (n-1)[(n-2) w/ρ² + w'/ρ]`.

use serde::{Deserialize, Serialize};

use crate::capacity::{capacity, capacity_radius, GridOptions};
use crate::error::{Error, Result};
use crate::geometry::{sphere_product_rule, Body, ParamBody3};
use crate::numeric::{golden_max, integrate, unit_sphere_area};

const N: usize = 3;

/// Profile presets, tagged by `kind` in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// `f(x) = slope · x`; not radial.
    Linear {
        slope: [f64; 3],
    },
    /// `f'(ρ)² = 2m/(ρ - 2m)`.
    Schwarzschild {
        m: f64,
    },
    /// `f'(ρ)² = 2M/(ρ - 2M)` with `M(ρ) = m_inf - δ (ρ₀/ρ)²` and horizon
    /// `ρ₀ = 2(m_inf - δ)`; nonnegative scalar curvature `4M'/ρ²`.
    Matter {
        m_inf: f64,
        delta: f64,
    },
    /// `f(ρ) = c ρ^a`.
    Power {
        c: f64,
        a: f64,
    },
    /// Samples of `f'` on increasing radii, natural cubic spline in between.
    Tabulated {
        radii: Vec<f64>,
        slopes: Vec<f64>,
    },
}

/// Asymptotically flat graph over the exterior of a centred ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFunction {
    pub profile: Profile,
    /// Radius of the inner ball `A`; defaults to the horizon for the
    /// Schwarzschild and matter profiles.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_radius: Option<f64>,
}

struct Spline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl Spline {
    fn natural(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Tridiagonal system for the interior second derivatives.
            let mut c = vec![0.0; n];
            let mut d = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let a = h0 / 6.0;
                let b = (h0 + h1) / 3.0;
                let cc = h1 / 6.0;
                let r = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
                let denom = b - a * c[i - 1];
                c[i] = cc / denom;
                d[i] = (r - a * d[i - 1]) / denom;
            }
            for i in (1..n - 1).rev() {
                m[i] = d[i] - c[i] * m[i + 1];
            }
        }
        Self {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        }
    }

    /// Value and first two derivatives.
    fn eval(&self, t: f64) -> [f64; 3] {
        let n = self.x.len();
        let i = match self.x.partition_point(|v| *v <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let v = a * self.y[i] + b * self.y[i + 1] + ((a.powi(3) - a) * m0 + (b.powi(3) - b) * m1) * h * h / 6.0;
        let d1 = (self.y[i + 1] - self.y[i]) / h + ((1.0 - 3.0 * a * a) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        let d2 = a * m0 + b * m1;
        [v, d1, d2]
    }
}

impl GraphFunction {
    pub fn new(profile: Profile, inner_radius: Option<f64>) -> Result<Self> {
        let g = Self {
            profile,
            inner_radius,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn schwarzschild(m: f64) -> Result<Self> {
        Self::new(Profile::Schwarzschild { m }, None)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.profile {
            Profile::Schwarzschild { m } if !(*m > 0.0) => {
                return Err(Error::input("Schwarzschild mass must be positive"))
            }
            Profile::Matter { m_inf, delta } if !(*m_inf > 0.0 && *delta >= 0.0 && 3.0 * delta < *m_inf) => {
                return Err(Error::input("matter profile needs m_inf > 0 and 0 ≤ δ < m_inf/3"))
            }
            Profile::Tabulated { radii, slopes } => {
                if radii.len() < 3 || radii.len() != slopes.len() {
                    return Err(Error::input("tabulated profile needs at least 3 matching samples"));
                }
                if radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 {
                    return Err(Error::input("tabulated radii must be positive and increasing"));
                }
                if slopes.iter().any(|v| !v.is_finite()) {
                    return Err(Error::input("tabulated slopes must be finite"));
                }
            }
            _ => {}
        }
        let r = self.inner()?;
        if !(r > 0.0) {
            return Err(Error::input("inner radius must be positive"));
        }
        if let Some(h) = self.horizon() {
            if r < h * (1.0 - 1e-12) {
                return Err(Error::Domain(format!(
                    "inner radius {r} lies inside the horizon {h}"
                )));
            }
        }
        Ok(())
    }

    fn horizon(&self) -> Option<f64> {
        match self.profile {
            Profile::Schwarzschild { m } => Some(2.0 * m),
            Profile::Matter { m_inf, delta } => Some(2.0 * (m_inf - delta)),
            _ => None,
        }
    }

    pub fn inner(&self) -> Result<f64> {
        self.inner_radius
            .or_else(|| self.horizon())
            .ok_or_else(|| Error::input("profile needs an inner_radius"))
    }

    pub fn is_radial(&self) -> bool {
        !matches!(self.profile, Profile::Linear { .. })
    }

    /// `(f', f'', f''')` of a radial profile at `ρ`.
    pub fn radial_derivatives(&self, rho: f64) -> [f64; 3] {
        match &self.profile {
            Profile::Constant { .. } | Profile::Linear { .. } => [0.0; 3],
            Profile::Schwarzschild { m } => {
                let d = rho - 2.0 * m;
                let f1 = (2.0 * m / d).sqrt();
                [f1, -0.5 * f1 / d, 0.75 * f1 / (d * d)]
            }
            Profile::Matter { m_inf, delta } => {
                let r0 = 2.0 * (m_inf - delta);
                let mm = |r: f64| m_inf - delta * (r0 / r).powi(2);
                // ψ = f'² = 2M/(ρ - 2M); derivatives by the quotient rule.
                let m0 = mm(rho);
                let m1 = 2.0 * delta * r0 * r0 / rho.powi(3);
                let m2 = -6.0 * delta * r0 * r0 / rho.powi(4);
                let g = rho - 2.0 * m0;
                let g1 = 1.0 - 2.0 * m1;
                let g2 = -2.0 * m2;
                let num = 2.0 * m0;
                let (n1, n2) = (2.0 * m1, 2.0 * m2);
                let psi = num / g;
                let psi1 = (n1 - psi * g1) / g;
                let psi2 = (n2 - 2.0 * psi1 * g1 - psi * g2) / g;
                let f1 = psi.sqrt();
                let f2 = psi1 / (2.0 * f1);
                let f3 = (psi2 - 2.0 * f2 * f2) / (2.0 * f1);
                [f1, f2, f3]
            }
            Profile::Power { c, a } => [
                c * a * rho.powf(a - 1.0),
                c * a * (a - 1.0) * rho.powf(a - 2.0),
                c * a * (a - 1.0) * (a - 2.0) * rho.powf(a - 3.0),
            ],
            Profile::Tabulated { radii, slopes } => {
                let s = Spline::natural(radii, slopes);
                let [v, d1, d2] = s.eval(rho);
                [v, d1, d2]
            }
        }
    }

    /// `w = f'²/(1+f'²)` and `w'`.
    fn w(&self, rho: f64) -> (f64, f64) {
        let [f1, f2, _] = self.radial_derivatives(rho);
        let q = 1.0 + f1 * f1;
        (f1 * f1 / q, 2.0 * f1 * f2 / (q * q))
    }

    fn value(&self, x: &[f64; 3]) -> f64 {
        match &self.profile {
            Profile::Constant { value } => *value,
            Profile::Linear { slope } => slope[0] * x[0] + slope[1] * x[1] + slope[2] * x[2],
            Profile::Schwarzschild { m } => {
                let rho = norm(x);
                (8.0 * m * (rho - 2.0 * m)).max(0.0).sqrt()
            }
            Profile::Power { c, a } => c * norm(x).powf(*a),
            _ => {
                // f(ρ) = ∫_{ρ_in}^{ρ} f'.
                let r0 = self.inner().unwrap_or(1.0);
                integrate(|r| self.radial_derivatives(r)[0], r0, norm(x), 1e-13, 1e-12)
            }
        }
    }

    /// Asymptotic-flatness check: the log-log slope of
    /// `|∇f| + |x||∇²f| + |x|²|∇³f|` over shells gives `-γ/2`; returns the
    /// fitted `γ` (infinite for a flat graph).
    pub fn decay_order(&self) -> f64 {
        let r0 = self.inner().unwrap_or(1.0).max(1.0);
        let radii: Vec<f64> = (0..8).map(|i| r0 * 1e2 * 2f64.powi(i)).collect();
        let q: Vec<f64> = radii.iter().map(|&r| self.decay_quantity(r)).collect();
        if q.iter().all(|v| *v == 0.0) {
            return f64::INFINITY;
        }
        let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
        let ys: Vec<f64> = q.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        -2.0 * sxy / sxx
    }

    fn decay_quantity(&self, r: f64) -> f64 {
        if let Profile::Linear { slope } = self.profile {
            return norm(&slope);
        }
        let [f1, f2, f3] = self.radial_derivatives(r);
        let hess = f2.abs().max(f1.abs() / r);
        let third = f3.abs().max(f2.abs() / r).max(f1.abs() / (r * r));
        f1.abs() + r * hess + r * r * third
    }

    /// `γ > (n-2)/2`, with a 10% margin against slow drifts of the fit.
    pub fn is_asymptotically_flat(&self) -> bool {
        self.decay_order() > 1.1 * (N as f64 - 2.0) / 2.0
    }

    /// `|∇f| > 1e3` just outside the inner sphere.
    pub fn has_horizon(&self) -> bool {
        match self.inner() {
            Ok(r) => self.radial_derivatives(r * (1.0 + 1e-8))[0].abs() > 1e3,
            Err(_) => false,
        }
    }
}

fn norm(x: &[f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

/// `R_f` at `x`: radial reduction for radial profiles, nested central
/// differences otherwise.
pub fn scalar_curvature(f: &GraphFunction, x: [f64; 3]) -> Result<f64> {
    let rho = norm(&x);
    let inner = f.inner().unwrap_or(0.0);
    if rho <= inner {
        return Err(Error::Domain(format!(
            "scalar curvature requested at |x| = {rho}, inside the inner sphere {inner}"
        )));
    }
    if f.is_radial() {
        let (w, w1) = f.w(rho);
        let n = N as f64;
        return Ok((n - 1.0) * ((n - 2.0) * w / (rho * rho) + w1 / rho));
    }
    let h = 1e-3 * rho.max(1.0);
    let vec_field = |y: [f64; 3]| -> [f64; 3] {
        let (g, hess) = derivatives_fd(f, y, h);
        let lap = hess[0][0] + hess[1][1] + hess[2][2];
        let q = 1.0 + g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
        let mut v = [0.0; 3];
        for j in 0..3 {
            let hg: f64 = (0..3).map(|i| hess[i][j] * g[i]).sum();
            v[j] = (lap * g[j] - hg) / q;
        }
        v
    };
    let mut div = 0.0;
    for j in 0..3 {
        let mut xp = x;
        let mut xm = x;
        xp[j] += h;
        xm[j] -= h;
        div += (vec_field(xp)[j] - vec_field(xm)[j]) / (2.0 * h);
    }
    Ok(div)
}

fn derivatives_fd(f: &GraphFunction, x: [f64; 3], h: f64) -> ([f64; 3], [[f64; 3]; 3]) {
    let at = |d: [f64; 3]| f.value(&[x[0] + d[0], x[1] + d[1], x[2] + d[2]]);
    let e = |i: usize, s: f64| {
        let mut d = [0.0; 3];
        d[i] = s;
        d
    };
    let f0 = at([0.0; 3]);
    let mut g = [0.0; 3];
    let mut hess = [[0.0; 3]; 3];
    for i in 0..3 {
        g[i] = (at(e(i, h)) - at(e(i, -h))) / (2.0 * h);
        hess[i][i] = (at(e(i, h)) - 2.0 * f0 + at(e(i, -h))) / (h * h);
        for j in 0..i {
            let mut pp = e(i, h);
            pp[j] = h;
            let mut pm = e(i, h);
            pm[j] = -h;
            let mut mp = e(i, -h);
            mp[j] = h;
            let mut mm = e(i, -h);
            mm[j] = -h;
            let v = (at(pp) - at(pm) - at(mp) + at(mm)) / (4.0 * h * h);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    (g, hess)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMass {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// Limit `a` of the fit `a + b r^{-s}`.
    pub extrapolated: f64,
    pub exponent: f64,
    pub fit_residual: f64,
}

/// Sphere integral of the ADM integrand at each radius, extrapolated to infinity.
pub fn adm_boundary(f: &GraphFunction, radii: &[f64]) -> Result<BoundaryMass> {
    if radii.len() < 3 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::input("adm_boundary needs at least three increasing radii"));
    }
    let inner = f.inner().unwrap_or(0.0);
    if radii[0] <= inner {
        return Err(Error::Domain("coordinate spheres must lie outside the inner body".into()));
    }
    let n = N as f64;
    let sigma = unit_sphere_area(N);
    let values: Vec<f64> = radii
        .iter()
        .map(|&r| {
            if f.is_radial() {
                0.5 * r.powf(n - 2.0) * f.w(r).0
            } else {
                let rule = sphere_product_rule(16);
                let h = 1e-3 * r;
                let total: f64 = rule
                    .iter()
                    .map(|(u, wq)| {
                        let x = [r * u.x, r * u.y, r * u.z];
                        let (g, hess) = derivatives_fd(f, x, h);
                        let lap = hess[0][0] + hess[1][1] + hess[2][2];
                        let q = 1.0 + g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
                        let s: f64 = (0..3)
                            .map(|j| {
                                let hg: f64 = (0..3).map(|i| hess[i][j] * g[i]).sum();
                                (lap * g[j] - hg) * x[j] / r
                            })
                            .sum();
                        wq * r * r * s / q
                    })
                    .sum();
                total / (2.0 * (n - 1.0) * sigma)
            }
        })
        .collect();
    let (extrapolated, exponent, fit_residual) = fit_limit(radii, &values);
    Ok(BoundaryMass {
        radii: radii.to_vec(),
        values,
        extrapolated,
        exponent,
        fit_residual,
    })
}

/// Least-squares fit of `a + b r^{-s}`: linear in `(a, b)`, golden search in `s`.
fn fit_limit(r: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let spread = y.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - y.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = y.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    if spread <= 1e-13 * scale {
        let a = y.iter().sum::<f64>() / y.len() as f64;
        return (a, 0.0, 0.0);
    }
    let solve = |s: f64| {
        let x: Vec<f64> = r.iter().map(|v| v.powf(-s)).collect();
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        let b = sxy / sxx;
        let a = my - b * mx;
        let res: f64 = x.iter().zip(y).map(|(xi, yi)| (a + b * xi - yi).powi(2)).sum();
        (a, res.sqrt())
    };
    let (s, _) = golden_max(|s| -solve(s).1, 0.1, 8.0, 1e-8);
    let (a, res) = solve(s);
    (a, s, res)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LamMass {
    /// `(1/σ) ∫_{∂A} H`.
    pub boundary_term: f64,
    /// `(1/((n-1)σ)) ∫ R_f`.
    pub bulk_term: f64,
    /// `m_ADM`, half the sum of the two terms.
    pub mass: f64,
}

/// Lam's identity `2 m_ADM = (1/σ) ∫_{∂A} H + (1/((n-1)σ)) ∫_{ℝⁿ∖A°} R_f`
/// over the inner ball.
pub fn lam_mass(f: &GraphFunction) -> Result<LamMass> {
    if !f.is_radial() {
        return Err(Error::input("the bulk integral is implemented for radial profiles"));
    }
    let r0 = f.inner()?;
    let n = N as f64;
    // Sphere of radius r0: H = 1/r0 on area σ r0^{n-1}.
    let boundary_term = r0.powf(n - 2.0);
    // ∫ R_f = σ ∫_{r0}^∞ R_f ρ^{n-1} dρ; on [2r0, ∞) substitute ρ = 2r0/x.
    let integrand = |rho: f64| {
        let (w, w1) = f.w(rho);
        (n - 1.0) * ((n - 2.0) * w * rho.powf(n - 3.0) + w1 * rho.powf(n - 2.0))
    };
    let near = integrate(integrand, r0, 2.0 * r0, 1e-14, 1e-12);
    let far = integrate(
        |x: f64| {
            if x <= 0.0 {
                0.0
            } else {
                let rho = 2.0 * r0 / x;
                integrand(rho) * rho / x
            }
        },
        0.0,
        1.0,
        1e-14,
        1e-12,
    );
    let bulk_term = (near + far) / (n - 1.0);
    Ok(LamMass {
        boundary_term,
        bulk_term,
        mass: 0.5 * (boundary_term + bulk_term),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenroseRecord {
    pub mass: f64,
    /// The `2 m_ADM` convention of the mass identity.
    pub twice_mass: f64,
    pub mass_radius: f64,
    pub capacity_radius: f64,
    pub surface_radius: f64,
    pub capacity_pass: bool,
    pub surface_pass: bool,
    pub tolerance: f64,
}

/// `capacity_radius(A, 2) ≤ (2m)^{1/(n-2)}` and `surface_radius(A) ≤ (2m)^{1/(n-2)}`
/// for the inner ball of the graph.
pub fn penrose_check(f: &GraphFunction, grid: &GridOptions, tolerance: f64) -> Result<PenroseRecord> {
    let r0 = f.inner()?;
    let body: Body = ParamBody3::ball([0.0; 3], r0)?.into();
    let mass = lam_mass(f)?.mass;
    let cap = capacity(&body, 2.0, grid)?;
    let capacity_r = capacity_radius(N, 2.0, cap.value())?;
    let surface_r = body.surface_radius();
    let mass_radius = (2.0 * mass).powf(1.0 / (N as f64 - 2.0));
    Ok(PenroseRecord {
        mass,
        twice_mass: 2.0 * mass,
        mass_radius,
        capacity_radius: capacity_r,
        surface_radius: surface_r,
        capacity_pass: capacity_r <= mass_radius * (1.0 + tolerance),
        surface_pass: surface_r <= mass_radius * (1.0 + tolerance),
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn spline_reproduces_cubic_interior() {
        let x: Vec<f64> = (0..20).map(|i| 1.0 + 0.1 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|t| t * t).collect();
        let s = Spline::natural(&x, &y);
        let [v, d1, _] = s.eval(1.95);
        assert!((v - 1.95f64.powi(2)).abs() < 1e-4);
        assert!((d1 - 3.9).abs() < 1e-2);
    }

    #[test]
    fn schwarzschild_mass_identities() {
        let f = GraphFunction::schwarzschild(0.7).unwrap();
        let lam = lam_mass(&f).unwrap();
        assert_relative_eq!(lam.mass, 0.7, max_relative = 1e-9);
        assert!(lam.bulk_term.abs() < 1e-9);
        let b = adm_boundary(&f, &[10.0, 20.0, 40.0, 80.0]).unwrap();
        assert_relative_eq!(b.extrapolated, 0.7, max_relative = 1e-12);
        assert!(scalar_curvature(&f, [3.0, 1.0, 0.5]).unwrap().abs() < 1e-12);
        assert!(f.has_horizon());
        assert!(f.is_asymptotically_flat());
    }

    #[test]
    fn matter_profile_mass_from_both_sides() {
        let f = GraphFunction::new(Profile::Matter { m_inf: 1.0, delta: 0.2 }, None).unwrap();
        let lam = lam_mass(&f).unwrap();
        assert_relative_eq!(lam.mass, 1.0, max_relative = 1e-8);
        let radii: Vec<f64> = (0..6).map(|i| 20.0 * 2f64.powi(i)).collect();
        let b = adm_boundary(&f, &radii).unwrap();
        assert_relative_eq!(b.extrapolated, 1.0, max_relative = 1e-6);
    }

    #[test]
    fn linear_graph_is_flat_but_not_decaying() {
        let f = GraphFunction::new(Profile::Linear { slope: [0.3, 0.0, 0.0] }, Some(1.0)).unwrap();
        assert!(scalar_curvature(&f, [2.0, 1.0, 0.0]).unwrap().abs() < 1e-6);
        assert!(!f.is_asymptotically_flat());
        let g = GraphFunction::new(Profile::Power { c: 1.0, a: 0.75 }, Some(1.0)).unwrap();
        assert!(!g.is_asymptotically_flat());
    }

    #[test]
    fn matter_profile_curvature_is_positive() {
        let f = GraphFunction::new(Profile::Matter { m_inf: 1.0, delta: 0.2 }, None).unwrap();
        for rho in [1.7, 2.0, 5.0, 40.0] {
            let r = scalar_curvature(&f, [rho, 0.0, 0.0]).unwrap();
            // R_f = 4 M'/ρ² in three dimensions.
            let r0 = 1.6;
            let m1 = 2.0 * 0.2 * r0 * r0 / rho.powi(3);
            assert_relative_eq!(r, 4.0 * m1 / (rho * rho), max_relative = 1e-8);
        }
    }
}
