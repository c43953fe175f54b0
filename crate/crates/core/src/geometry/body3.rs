//! Closed parametric families of convex solids in ℝ³.
//!
//! Smooth members (balls, ellipsoids and positive Minkowski combinations of
//! them) are handled through the support function `h` and its derivatives:
//! the boundary point with outer normal `ν` is `∇h(ν)` and the tangential part
//! of `∇²h(ν)` is the reverse Weingarten map, whose eigenvalues are the
//! principal radii of curvature.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3, Vector3};

use super::SurfaceQuadrature;
use crate::error::{Error, Result};
use crate::numeric::gauss_legendre;

pub const DEFAULT_QUADRATURE_ORDER: usize = 32;

#[derive(Clone, Debug, PartialEq)]
pub enum Shape3 {
    Ball {
        center: [f64; 3],
        radius: f64,
    },
    /// Semi-axes `a ≥ b ≥ c > 0` along the columns of `rotation`.
    Ellipsoid {
        center: [f64; 3],
        semi_axes: [f64; 3],
        rotation: [[f64; 3]; 3],
    },
    /// Axis-aligned box; carries no curvature.
    Box {
        center: [f64; 3],
        half_sides: [f64; 3],
    },
    /// `Σ λ_j K_j` with `λ_j > 0` over smooth members.
    Combination(Vec<(f64, Shape3)>),
}

pub const IDENTITY: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

#[derive(Clone, Debug, PartialEq)]
pub struct ParamBody3 {
    pub shape: Shape3,
    pub quadrature_order: usize,
}

pub(crate) fn v3(a: [f64; 3]) -> Vector3<f64> {
    Vector3::new(a[0], a[1], a[2])
}

pub(crate) fn arr(v: Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn mat(r: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| r[i][j])
}

fn mat_arr(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = m[(i, j)];
        }
    }
    out
}

/// Orthonormal tangent pair completing `n`.
pub(crate) fn tangent_basis(n: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let a = if n.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let t1 = (a - n * n.dot(&a)).normalize();
    let t2 = n.cross(&t1);
    (t1, t2)
}

fn sym2_eigen(m: &Matrix2<f64>) -> (f64, f64) {
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
    (0.5 * tr - disc, 0.5 * tr + disc)
}

impl Shape3 {
    pub fn ellipsoid(center: [f64; 3], semi_axes: [f64; 3]) -> Self {
        Shape3::Ellipsoid {
            center,
            semi_axes,
            rotation: IDENTITY,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Shape3::Ball { radius, .. } if *radius <= 0.0 || !radius.is_finite() => {
                Err(Error::input("ball radius must be positive"))
            }
            Shape3::Ellipsoid {
                semi_axes: [a, b, c],
                rotation,
                ..
            } => {
                if !(*a >= *b && *b >= *c && *c > 0.0) {
                    return Err(Error::input(format!(
                        "ellipsoid semi-axes must satisfy a ≥ b ≥ c > 0, got ({a}, {b}, {c})"
                    )));
                }
                let r = mat(rotation);
                if ((r.transpose() * r) - Matrix3::identity()).norm() > 1e-9 {
                    return Err(Error::input("ellipsoid rotation must be orthogonal"));
                }
                Ok(())
            }
            Shape3::Box { half_sides, .. } if half_sides.iter().any(|s| *s <= 0.0) => {
                Err(Error::input("box half-sides must be positive"))
            }
            Shape3::Combination(parts) => {
                if parts.is_empty() {
                    return Err(Error::input("empty Minkowski combination"));
                }
                for (w, s) in parts {
                    if *w <= 0.0 {
                        return Err(Error::input("combination weights must be positive"));
                    }
                    if !s.is_smooth() {
                        return Err(Error::input("combination members must be smooth"));
                    }
                    s.validate()?;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn is_smooth(&self) -> bool {
        match self {
            Shape3::Box { .. } => false,
            Shape3::Combination(parts) => parts.iter().all(|(_, s)| s.is_smooth()),
            _ => true,
        }
    }

    pub fn center(&self) -> Vector3<f64> {
        match self {
            Shape3::Ball { center, .. }
            | Shape3::Ellipsoid { center, .. }
            | Shape3::Box { center, .. } => v3(*center),
            Shape3::Combination(parts) => parts
                .iter()
                .map(|(w, s)| s.center() * *w)
                .fold(Vector3::zeros(), |a, b| a + b),
        }
    }

    pub fn support(&self, u: &Vector3<f64>) -> f64 {
        match self {
            Shape3::Ball { center, radius } => v3(*center).dot(u) + radius,
            Shape3::Ellipsoid {
                center,
                semi_axes,
                rotation,
            } => {
                let local = mat(rotation).transpose() * u;
                let m = Vector3::new(
                    semi_axes[0] * local.x,
                    semi_axes[1] * local.y,
                    semi_axes[2] * local.z,
                );
                v3(*center).dot(u) + m.norm()
            }
            Shape3::Box { center, half_sides } => {
                v3(*center).dot(u)
                    + half_sides[0] * u.x.abs()
                    + half_sides[1] * u.y.abs()
                    + half_sides[2] * u.z.abs()
            }
            Shape3::Combination(parts) => parts.iter().map(|(w, s)| w * s.support(u)).sum(),
        }
    }

    fn ellipsoid_quadric(semi_axes: &[f64; 3], rotation: &[[f64; 3]; 3]) -> Matrix3<f64> {
        let r = mat(rotation);
        let d2 = Matrix3::from_diagonal(&Vector3::new(
            semi_axes[0].powi(2),
            semi_axes[1].powi(2),
            semi_axes[2].powi(2),
        ));
        r * d2 * r.transpose()
    }

    /// `∇h(ν)`: the boundary point with outer normal `ν` (smooth shapes).
    pub fn gradient_map(&self, nu: &Vector3<f64>) -> Vector3<f64> {
        match self {
            Shape3::Ball { center, radius } => v3(*center) + nu * *radius,
            Shape3::Ellipsoid {
                center,
                semi_axes,
                rotation,
            } => {
                let q = Self::ellipsoid_quadric(semi_axes, rotation);
                let qn = q * nu;
                v3(*center) + qn / nu.dot(&qn).sqrt()
            }
            Shape3::Combination(parts) => parts
                .iter()
                .map(|(w, s)| s.gradient_map(nu) * *w)
                .fold(Vector3::zeros(), |a, b| a + b),
            Shape3::Box { .. } => unreachable!("gradient map of a box"),
        }
    }

    /// `∇²h(ν)` (smooth shapes); `ν` lies in its kernel.
    pub fn support_hessian(&self, nu: &Vector3<f64>) -> Matrix3<f64> {
        match self {
            Shape3::Ball { radius, .. } => (Matrix3::identity() - nu * nu.transpose()) * *radius,
            Shape3::Ellipsoid {
                semi_axes,
                rotation,
                ..
            } => {
                let q = Self::ellipsoid_quadric(semi_axes, rotation);
                let qn = q * nu;
                let h0 = nu.dot(&qn).sqrt();
                q / h0 - qn * qn.transpose() / h0.powi(3)
            }
            Shape3::Combination(parts) => parts
                .iter()
                .map(|(w, s)| s.support_hessian(nu) * *w)
                .fold(Matrix3::zeros(), |a, b| a + b),
            Shape3::Box { .. } => unreachable!("support hessian of a box"),
        }
    }

    /// Principal radii of curvature `(r_min, r_max)` at the point with normal `ν`.
    pub fn principal_radii(&self, nu: &Vector3<f64>) -> (f64, f64) {
        let h = self.support_hessian(nu);
        let (t1, t2) = tangent_basis(nu);
        let m = Matrix2::new(
            t1.dot(&(h * t1)),
            t1.dot(&(h * t2)),
            t2.dot(&(h * t1)),
            t2.dot(&(h * t2)),
        );
        sym2_eigen(&m)
    }

    pub fn rotated(&self, r: &Matrix3<f64>) -> Result<Shape3> {
        Ok(match self {
            Shape3::Ball { center, radius } => Shape3::Ball {
                center: arr(r * v3(*center)),
                radius: *radius,
            },
            Shape3::Ellipsoid {
                center,
                semi_axes,
                rotation,
            } => Shape3::Ellipsoid {
                center: arr(r * v3(*center)),
                semi_axes: *semi_axes,
                rotation: mat_arr(&(r * mat(rotation))),
            },
            Shape3::Combination(parts) => Shape3::Combination(
                parts
                    .iter()
                    .map(|(w, s)| Ok((*w, s.rotated(r)?)))
                    .collect::<Result<_>>()?,
            ),
            Shape3::Box { .. } => {
                return Err(Error::input("boxes are axis-aligned and cannot be rotated"))
            }
        })
    }

    pub fn scaled(&self, lambda: f64) -> Shape3 {
        match self {
            Shape3::Ball { center, radius } => Shape3::Ball {
                center: center.map(|c| c * lambda),
                radius: radius * lambda,
            },
            Shape3::Ellipsoid {
                center,
                semi_axes,
                rotation,
            } => Shape3::Ellipsoid {
                center: center.map(|c| c * lambda),
                semi_axes: semi_axes.map(|a| a * lambda),
                rotation: *rotation,
            },
            Shape3::Box { center, half_sides } => Shape3::Box {
                center: center.map(|c| c * lambda),
                half_sides: half_sides.map(|s| s * lambda),
            },
            Shape3::Combination(parts) => {
                Shape3::Combination(parts.iter().map(|(w, s)| (*w * lambda, s.clone())).collect())
            }
        }
    }

    pub fn translated(&self, v: [f64; 3]) -> Shape3 {
        let add = |c: &[f64; 3]| [c[0] + v[0], c[1] + v[1], c[2] + v[2]];
        match self {
            Shape3::Ball { center, radius } => Shape3::Ball {
                center: add(center),
                radius: *radius,
            },
            Shape3::Ellipsoid {
                center,
                semi_axes,
                rotation,
            } => Shape3::Ellipsoid {
                center: add(center),
                semi_axes: *semi_axes,
                rotation: *rotation,
            },
            Shape3::Box { center, half_sides } => Shape3::Box {
                center: add(center),
                half_sides: *half_sides,
            },
            Shape3::Combination(parts) => {
                let total: f64 = parts.iter().map(|(w, _)| w).sum();
                let shift = v.map(|x| x / total);
                Shape3::Combination(
                    parts
                        .iter()
                        .map(|(w, s)| (*w, s.translated(shift)))
                        .collect(),
                )
            }
        }
    }
}

/// Product rule on the sphere: Gauss-Legendre in `z = cos θ`, trapezoid in `φ`.
pub fn sphere_product_rule(order: usize) -> Vec<(Vector3<f64>, f64)> {
    let (zs, wz) = gauss_legendre(order);
    let nphi = 2 * order;
    let dphi = 2.0 * PI / nphi as f64;
    let mut out = Vec::with_capacity(order * nphi);
    for (z, w) in zs.iter().zip(&wz) {
        let s = (1.0 - z * z).max(0.0).sqrt();
        for j in 0..nphi {
            let phi = (j as f64 + 0.5) * dphi;
            out.push((Vector3::new(s * phi.cos(), s * phi.sin(), *z), w * dphi));
        }
    }
    out
}

impl ParamBody3 {
    pub fn new(shape: Shape3) -> Result<Self> {
        Self::with_order(shape, DEFAULT_QUADRATURE_ORDER)
    }

    pub fn with_order(shape: Shape3, quadrature_order: usize) -> Result<Self> {
        if quadrature_order == 0 {
            return Err(Error::input("quadrature order must be positive"));
        }
        shape.validate()?;
        Ok(Self {
            shape,
            quadrature_order,
        })
    }

    pub fn ball(center: [f64; 3], radius: f64) -> Result<Self> {
        Self::new(Shape3::Ball { center, radius })
    }

    pub fn ellipsoid(semi_axes: [f64; 3]) -> Result<Self> {
        Self::new(Shape3::ellipsoid([0.0; 3], semi_axes))
    }

    pub fn cube(side: f64) -> Result<Self> {
        Self::new(Shape3::Box {
            center: [0.0; 3],
            half_sides: [0.5 * side; 3],
        })
    }

    fn derived(&self, shape: Shape3) -> Self {
        Self {
            shape,
            quadrature_order: self.quadrature_order,
        }
    }

    pub fn is_smooth(&self) -> bool {
        self.shape.is_smooth()
    }

    pub(crate) fn require_smooth(&self) -> Result<()> {
        if self.is_smooth() {
            Ok(())
        } else {
            Err(Error::UnsupportedSmoothness(
                "boxes carry no pointwise curvature".into(),
            ))
        }
    }

    pub fn center(&self) -> [f64; 3] {
        arr(self.shape.center())
    }

    pub fn support(&self, direction: [f64; 3]) -> Result<f64> {
        let u = v3(direction);
        if (u.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::input(format!(
                "support direction must be a unit vector (norm {})",
                u.norm()
            )));
        }
        Ok(self.shape.support(&u))
    }

    pub fn minkowski_sum(&self, other: &ParamBody3, t: f64) -> Result<Self> {
        if t < 0.0 {
            return Err(Error::input("Minkowski scale must be nonnegative"));
        }
        let shape = match (&self.shape, &other.shape) {
            (
                Shape3::Ball { center: c1, radius: r1 },
                Shape3::Ball { center: c2, radius: r2 },
            ) => Shape3::Ball {
                center: [c1[0] + t * c2[0], c1[1] + t * c2[1], c1[2] + t * c2[2]],
                radius: r1 + t * r2,
            },
            (
                Shape3::Box { center: c1, half_sides: s1 },
                Shape3::Box { center: c2, half_sides: s2 },
            ) => Shape3::Box {
                center: [c1[0] + t * c2[0], c1[1] + t * c2[1], c1[2] + t * c2[2]],
                half_sides: [s1[0] + t * s2[0], s1[1] + t * s2[1], s1[2] + t * s2[2]],
            },
            (a, b) if a.is_smooth() && b.is_smooth() => {
                if t == 0.0 {
                    a.clone()
                } else {
                    Shape3::Combination(vec![(1.0, a.clone()), (t, b.clone())])
                }
            }
            _ => {
                return Err(Error::input(
                    "Minkowski sum of a box with a non-box leaves the parametric family",
                ))
            }
        };
        Ok(self.derived(shape))
    }

    /// `h_A + t h_B` in combination form, without sign restriction on `t`.
    pub(crate) fn linear_perturbation(&self, dir: &ParamBody3, t: f64) -> Self {
        self.derived(Shape3::Combination(vec![
            (1.0, self.shape.clone()),
            (t, dir.shape.clone()),
        ]))
    }

    /// `Σ λ_j R_j(A)`.
    pub fn rotation_mean(&self, parts: &[(f64, Matrix3<f64>)]) -> Result<Self> {
        let shape = Shape3::Combination(
            parts
                .iter()
                .map(|(w, r)| Ok((*w, self.shape.rotated(r)?)))
                .collect::<Result<_>>()?,
        );
        shape.validate()?;
        Ok(self.derived(shape))
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        self.derived(self.shape.scaled(lambda))
    }

    pub fn translated(&self, v: [f64; 3]) -> Self {
        self.derived(self.shape.translated(v))
    }

    fn rule(&self) -> Vec<(Vector3<f64>, f64)> {
        sphere_product_rule(self.quadrature_order)
    }

    pub fn volume(&self) -> f64 {
        match &self.shape {
            Shape3::Ball { radius, .. } => 4.0 / 3.0 * PI * radius.powi(3),
            Shape3::Ellipsoid { semi_axes, .. } => {
                4.0 / 3.0 * PI * semi_axes[0] * semi_axes[1] * semi_axes[2]
            }
            Shape3::Box { half_sides, .. } => 8.0 * half_sides.iter().product::<f64>(),
            Shape3::Combination(_) => {
                // V = (1/3) ∫ (h - c·ν) dS, origin moved to the centre.
                let c = self.shape.center();
                self.rule()
                    .iter()
                    .map(|(nu, w)| {
                        let (r1, r2) = self.shape.principal_radii(nu);
                        w * (self.shape.support(nu) - c.dot(nu)) * r1 * r2
                    })
                    .sum::<f64>()
                    / 3.0
            }
        }
    }

    pub fn surface_area(&self) -> f64 {
        match &self.shape {
            Shape3::Ball { radius, .. } => 4.0 * PI * radius.powi(2),
            Shape3::Box { half_sides: s, .. } => 8.0 * (s[0] * s[1] + s[1] * s[2] + s[0] * s[2]),
            _ => self
                .rule()
                .iter()
                .map(|(nu, w)| {
                    let (r1, r2) = self.shape.principal_radii(nu);
                    w * r1 * r2
                })
                .sum(),
        }
    }

    pub fn mean_width(&self) -> f64 {
        match &self.shape {
            Shape3::Ball { radius, .. } => 2.0 * radius,
            Shape3::Box { half_sides, .. } => half_sides.iter().sum(),
            Shape3::Combination(parts) => parts
                .iter()
                .map(|(w, s)| w * self.derived(s.clone()).mean_width())
                .sum(),
            Shape3::Ellipsoid { .. } => {
                let c = self.shape.center();
                self.rule()
                    .iter()
                    .map(|(nu, w)| w * (self.shape.support(nu) - c.dot(nu)))
                    .sum::<f64>()
                    * 2.0
                    / (4.0 * PI)
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match &self.shape {
            Shape3::Ball { radius, .. } => 2.0 * radius,
            Shape3::Ellipsoid { semi_axes, .. } => 2.0 * semi_axes[0],
            Shape3::Box { half_sides, .. } => 2.0 * v3(*half_sides).norm(),
            Shape3::Combination(_) => {
                let width = |u: &Vector3<f64>| self.shape.support(u) + self.shape.support(&-u);
                let mut best = self
                    .rule()
                    .into_iter()
                    .map(|(u, _)| u)
                    .max_by(|a, b| width(a).total_cmp(&width(b)))
                    .expect("rule is nonempty");
                // Width gradient on the sphere is ∇h(u) - ∇h(-u) projected to the tangent plane.
                let mut step = 0.1;
                for _ in 0..200 {
                    let g = self.shape.gradient_map(&best) - self.shape.gradient_map(&-best);
                    let tangent = g - best * g.dot(&best);
                    let cand = (best + tangent * step).normalize();
                    if width(&cand) > width(&best) {
                        best = cand;
                        step *= 1.5;
                    } else {
                        step *= 0.5;
                    }
                    if step < 1e-14 {
                        break;
                    }
                }
                width(&best)
            }
        }
    }

    /// Product-rule boundary quadrature indexed by outer normal.
    pub fn curvature_quadrature(&self) -> Result<SurfaceQuadrature> {
        self.require_smooth()?;
        let rule = self.rule();
        let mut q = SurfaceQuadrature {
            dim: 3,
            points: Vec::with_capacity(rule.len()),
            normals: Vec::with_capacity(rule.len()),
            weights: Vec::with_capacity(rule.len()),
            principal_curvatures: Some(Vec::with_capacity(rule.len())),
        };
        for (nu, w) in rule {
            let (r1, r2) = self.shape.principal_radii(&nu);
            q.points.push(arr(self.shape.gradient_map(&nu)));
            q.normals.push(arr(nu));
            q.weights.push(w * r1 * r2);
            if let Some(k) = q.principal_curvatures.as_mut() {
                k.push(vec![1.0 / r2, 1.0 / r1]);
            }
        }
        Ok(q)
    }

    /// `b_A(x)`; exact for balls and boxes, support-function maximization otherwise.
    pub fn signed_distance(&self, x: [f64; 3]) -> f64 {
        let p = v3(x);
        match &self.shape {
            Shape3::Ball { center, radius } => (p - v3(*center)).norm() - radius,
            Shape3::Box { center, half_sides } => {
                let d = p - v3(*center);
                let q = Vector3::new(
                    d.x.abs() - half_sides[0],
                    d.y.abs() - half_sides[1],
                    d.z.abs() - half_sides[2],
                );
                let outside = q.map(|v| v.max(0.0)).norm();
                outside + q.max().min(0.0)
            }
            _ => {
                let g = |u: &Vector3<f64>| p.dot(u) - self.shape.support(u);
                let mut best = sphere_product_rule(12)
                    .into_iter()
                    .map(|(u, _)| u)
                    .max_by(|a, b| g(a).total_cmp(&g(b)))
                    .expect("rule is nonempty");
                let mut step = 0.2;
                for _ in 0..400 {
                    let grad = p - self.shape.gradient_map(&best);
                    let tangent = grad - best * grad.dot(&best);
                    if tangent.norm() < 1e-14 {
                        break;
                    }
                    let cand = (best + tangent * step).normalize();
                    if g(&cand) > g(&best) {
                        best = cand;
                        step *= 1.5;
                    } else {
                        step *= 0.5;
                        if step < 1e-15 {
                            break;
                        }
                    }
                }
                g(&best)
            }
        }
    }

    /// Pushforward of `X dℋ²` (sampled on [`Self::curvature_quadrature`]) to a
    /// `bands × sectors` partition of the sphere in `(z, φ)`.
    pub fn gauss_pushforward(&self, density: &[f64], bands: usize, sectors: usize) -> Result<Vec<f64>> {
        if !self.is_smooth() {
            return Err(Error::DegenerateGaussMap(
                "box normals concentrate on six directions".into(),
            ));
        }
        let q = self.curvature_quadrature()?;
        if density.len() != q.len() {
            return Err(Error::input(format!(
                "density has {} samples, quadrature has {}",
                density.len(),
                q.len()
            )));
        }
        let mut out = vec![0.0; bands * sectors];
        for ((n, w), x) in q.normals.iter().zip(&q.weights).zip(density) {
            let zb = (((n[2] + 1.0) * 0.5 * bands as f64).floor() as usize).min(bands - 1);
            let phi = n[1].atan2(n[0]).rem_euclid(2.0 * PI);
            let sb = ((phi / (2.0 * PI) * sectors as f64).floor() as usize).min(sectors - 1);
            out[zb * sectors + sb] += w * x;
        }
        Ok(out)
    }

    /// Boundary point, outer normal (when defined) on the ray from the centre
    /// in direction `omega`; for Minkowski combinations `omega` is the normal.
    pub(crate) fn boundary_sample(&self, omega: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
        let c = self.shape.center();
        match &self.shape {
            Shape3::Ball { radius, .. } => (c + omega * *radius, *omega),
            Shape3::Ellipsoid {
                semi_axes,
                rotation,
                ..
            } => {
                let r = mat(rotation);
                let local = r.transpose() * omega;
                let inv = Vector3::new(
                    local.x / semi_axes[0],
                    local.y / semi_axes[1],
                    local.z / semi_axes[2],
                );
                let t = 1.0 / inv.norm();
                let y = local * t;
                let n_local = Vector3::new(
                    y.x / semi_axes[0].powi(2),
                    y.y / semi_axes[1].powi(2),
                    y.z / semi_axes[2].powi(2),
                );
                (c + omega * t, (r * n_local).normalize())
            }
            Shape3::Box { half_sides, .. } => {
                let ratios = [
                    half_sides[0] / omega.x.abs(),
                    half_sides[1] / omega.y.abs(),
                    half_sides[2] / omega.z.abs(),
                ];
                let t = ratios.iter().copied().fold(f64::INFINITY, f64::min);
                let mut n = Vector3::zeros();
                for (i, r) in ratios.iter().enumerate() {
                    if (*r - t).abs() <= 1e-10 * t {
                        n[i] = omega[i].signum();
                    }
                }
                (c + omega * t, n.normalize())
            }
            Shape3::Combination(_) => (self.shape.gradient_map(omega), *omega),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ellipsoid_area_matches_known_value() {
        // Surface area of the (2, 1.5, 1) ellipsoid via Legendre's elliptic-integral formula.
        let e = ParamBody3::ellipsoid([2.0, 1.5, 1.0]).unwrap();
        assert_relative_eq!(e.surface_area(), 27.886_442_473_502_58, max_relative = 1e-6);
        assert_relative_eq!(e.volume(), 4.0 * PI, max_relative = 1e-12);
    }

    #[test]
    fn combination_volume_and_area_of_balls() {
        let b = ParamBody3::ball([0.0; 3], 1.0).unwrap();
        let e = ParamBody3::ellipsoid([2.0, 1.5, 1.0]).unwrap();
        let s = b.minkowski_sum(&b, 1.0).unwrap();
        assert_relative_eq!(s.volume(), 4.0 / 3.0 * PI * 8.0, max_relative = 1e-12);
        let c = ParamBody3::new(Shape3::Combination(vec![(1.0, e.shape.clone())])).unwrap();
        assert_relative_eq!(c.volume(), e.volume(), max_relative = 1e-8);
        assert_relative_eq!(c.surface_area(), e.surface_area(), max_relative = 1e-10);
    }

    #[test]
    fn ellipsoid_curvatures_at_axis_tip() {
        let e = ParamBody3::ellipsoid([2.0, 1.5, 1.0]).unwrap();
        let (r1, r2) = e.shape.principal_radii(&Vector3::x());
        // At (a,0,0): κ = a/b², a/c².
        assert_relative_eq!(1.0 / r1, 2.0, max_relative = 1e-12);
        assert_relative_eq!(1.0 / r2, 2.0 / 2.25, max_relative = 1e-12);
    }

    #[test]
    fn rotated_ellipsoid_support() {
        let e = ParamBody3::ellipsoid([2.0, 1.5, 1.0]).unwrap();
        let r = nalgebra::Rotation3::from_euler_angles(0.3, -0.7, 1.1).into_inner();
        let re = ParamBody3::new(e.shape.rotated(&r).unwrap()).unwrap();
        let u = Vector3::new(0.2, -0.5, 0.7).normalize();
        assert_relative_eq!(
            re.support(arr(u)).unwrap(),
            e.support(arr(r.transpose() * u)).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn box_rejects_curvature() {
        let c = ParamBody3::cube(1.0).unwrap();
        assert!(matches!(
            c.curvature_quadrature(),
            Err(Error::UnsupportedSmoothness(_))
        ));
    }

    #[test]
    fn ellipsoid_signed_distance_on_axes() {
        let e = ParamBody3::ellipsoid([2.0, 1.5, 1.0]).unwrap();
        assert_relative_eq!(e.signed_distance([3.0, 0.0, 0.0]), 1.0, max_relative = 1e-9);
        assert_relative_eq!(e.signed_distance([0.0, 0.0, 0.5]), -0.5, max_relative = 1e-9);
    }
}
