//! Convex bodies and their geometric quantities.

mod body3;
mod support2;


use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

pub use body3::{sphere_product_rule, ParamBody3, Shape3, DEFAULT_QUADRATURE_ORDER, IDENTITY};
pub use support2::{SupportBody2, DEFAULT_GRID};

pub(crate) use body3::{arr, v3};

use crate::error::{Error, Result};
use crate::numeric::{binomial, unit_ball_volume, unit_sphere_area};

/// Boundary sample with weights, outer normals and (for smooth bodies)
/// principal curvatures. Planar samples use a zero third coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceQuadrature {
    pub dim: usize,
    pub points: Vec<[f64; 3]>,
    pub normals: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub principal_curvatures: Option<Vec<Vec<f64>>>,
}

impl SurfaceQuadrature {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Normalized mean curvature `(κ_1 + ... + κ_{n-1})/(n-1)` per point.
    pub fn mean_curvatures(&self) -> Option<Vec<f64>> {
        self.principal_curvatures.as_ref().map(|ks| {
            ks.iter()
                .map(|k| k.iter().sum::<f64>() / k.len() as f64)
                .collect()
        })
    }

    /// Gauss curvature `κ_1 ⋯ κ_{n-1}` per point.
    pub fn gauss_curvatures(&self) -> Option<Vec<f64>> {
        self.principal_curvatures
            .as_ref()
            .map(|ks| ks.iter().map(|k| k.iter().product()).collect())
    }

    pub fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.weights.iter().enumerate().map(|(i, w)| w * f(i)).sum()
    }
}

/// A convex body in ℝ² or ℝ³.
#[derive(Clone, Debug)]
pub enum Body {
    Planar(SupportBody2),
    Solid(ParamBody3),
}

impl From<SupportBody2> for Body {
    fn from(b: SupportBody2) -> Self {
        Body::Planar(b)
    }
}

impl From<ParamBody3> for Body {
    fn from(b: ParamBody3) -> Self {
        Body::Solid(b)
    }
}

impl Body {
    pub fn dim(&self) -> usize {
        match self {
            Body::Planar(_) => 2,
            Body::Solid(_) => 3,
        }
    }

    pub fn is_smooth(&self) -> bool {
        match self {
            Body::Planar(b) => b.is_smooth(),
            Body::Solid(b) => b.is_smooth(),
        }
    }

    /// Interior reference point: the Steiner point in the plane, the centre in space.
    pub fn center(&self) -> [f64; 3] {
        match self {
            Body::Planar(b) => {
                let c = b.steiner_point();
                [c[0], c[1], 0.0]
            }
            Body::Solid(b) => b.center(),
        }
    }

    pub fn support(&self, direction: &[f64]) -> Result<f64> {
        match (self, direction.len()) {
            (Body::Planar(b), 2) => b.support([direction[0], direction[1]]),
            (Body::Solid(b), 3) => b.support([direction[0], direction[1], direction[2]]),
            (_, d) => Err(Error::input(format!(
                "direction has {d} components for a {}-dimensional body",
                self.dim()
            ))),
        }
    }

    pub fn minkowski_sum(&self, other: &Body, t: f64) -> Result<Body> {
        match (self, other) {
            (Body::Planar(a), Body::Planar(b)) => Ok(Body::Planar(a.minkowski_sum(b, t)?)),
            (Body::Solid(a), Body::Solid(b)) => Ok(Body::Solid(a.minkowski_sum(b, t)?)),
            _ => Err(Error::input("Minkowski sum of bodies of different dimension")),
        }
    }

    /// `h_A + t h_B` for either sign of `t`; planar grids must agree and solid
    /// directions must be smooth. Kept in one representation for every `t` so
    /// the capacity mesh varies smoothly along the family.
    pub(crate) fn linear_perturbation(&self, dir: &Body, t: f64) -> Result<Body> {
        match (self, dir) {
            (Body::Planar(a), Body::Planar(b)) if a.grid_size() == b.grid_size() => {
                Ok(Body::Planar(a.combine(b, t)))
            }
            (Body::Planar(_), Body::Planar(_)) => Err(Error::input("support grids differ")),
            (Body::Solid(a), Body::Solid(b)) if b.is_smooth() && a.is_smooth() => {
                Ok(Body::Solid(a.linear_perturbation(b, t)))
            }
            (Body::Solid(_), Body::Solid(_)) => Err(Error::UnsupportedSmoothness(
                "solid perturbations need smooth bodies".into(),
            )),
            _ => Err(Error::input("perturbation of different dimension")),
        }
    }

    pub fn scaled(&self, lambda: f64) -> Body {
        match self {
            Body::Planar(b) => Body::Planar(b.scaled(lambda)),
            Body::Solid(b) => Body::Solid(b.scaled(lambda)),
        }
    }

    pub fn translated(&self, v: &[f64]) -> Body {
        match self {
            Body::Planar(b) => Body::Planar(b.translated([v[0], v[1]])),
            Body::Solid(b) => Body::Solid(b.translated([v[0], v[1], v[2]])),
        }
    }

    pub fn mean_width(&self) -> f64 {
        match self {
            Body::Planar(b) => b.mean_width(),
            Body::Solid(b) => b.mean_width(),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Body::Planar(b) => b.diameter(),
            Body::Solid(b) => b.diameter(),
        }
    }

    /// Lebesgue measure of the body.
    pub fn volume(&self) -> f64 {
        match self {
            Body::Planar(b) => b.area(),
            Body::Solid(b) => b.volume(),
        }
    }

    /// `ℋ^{n-1}(∂A)`.
    pub fn surface_area(&self) -> f64 {
        match self {
            Body::Planar(b) => b.perimeter(),
            Body::Solid(b) => b.surface_area(),
        }
    }

    pub fn curvature_quadrature(&self) -> Result<SurfaceQuadrature> {
        match self {
            Body::Planar(b) => b.curvature_quadrature(),
            Body::Solid(b) => b.curvature_quadrature(),
        }
    }

    /// `M_j = ∫ m_j dℋ^{n-1}` with `m_j` the normalized elementary symmetric
    /// function of the principal curvatures.
    pub fn integral_mean_curvature(&self, j: usize) -> Result<f64> {
        let n = self.dim();
        if j >= n {
            return Err(Error::input(format!(
                "integral mean curvature index {j} outside 0..{}",
                n - 1
            )));
        }
        if j == 0 {
            return Ok(self.surface_area());
        }
        let q = self.curvature_quadrature()?;
        let ks = q.principal_curvatures.as_ref().expect("smooth quadrature");
        let norm = binomial(n - 1, j);
        Ok(q.integrate(|i| elementary_symmetric(&ks[i], j) / norm))
    }

    /// `∫ H^q dℋ^{n-1}` with `H` the normalized mean curvature.
    pub fn mean_curvature_power_integral(&self, q: f64) -> Result<f64> {
        let quad = self.curvature_quadrature()?;
        let h = quad.mean_curvatures().expect("smooth quadrature");
        Ok(quad.integrate(|i| h[i].powf(q)))
    }

    /// Area of the outer parallel surface `∂(A + tB)`: `Σ C(n-1, j) M_j t^j`.
    /// For non-smooth bodies `M_{n-2}` is taken from the mean width and
    /// `M_{n-1} = σ_{n-1}`, both valid for every convex body.
    pub fn steiner_area(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::input("Steiner parameter must be nonnegative"));
        }
        let n = self.dim();
        let sigma = unit_sphere_area(n);
        let mut total = 0.0;
        for j in 0..n {
            let mj = if self.is_smooth() {
                self.integral_mean_curvature(j)?
            } else if j == 0 {
                self.surface_area()
            } else if j == n - 1 {
                sigma
            } else {
                sigma * self.mean_width() / 2.0
            };
            total += binomial(n - 1, j) * mj * t.powi(j as i32);
        }
        Ok(total)
    }

    pub fn signed_distance(&self, x: &[f64]) -> Result<f64> {
        match (self, x.len()) {
            (Body::Planar(b), 2) => Ok(b.signed_distance([x[0], x[1]])),
            (Body::Solid(b), 3) => Ok(b.signed_distance([x[0], x[1], x[2]])),
            (_, d) => Err(Error::input(format!(
                "point has {d} components for a {}-dimensional body",
                self.dim()
            ))),
        }
    }

    /// Pushforward of `X dℋ^{n-1}` under the Gauss map. `density` is sampled
    /// on [`Body::curvature_quadrature`]; the circle is split into `bins`
    /// equal arcs, the sphere into `bins` z-bands times `2·bins` sectors.
    pub fn gauss_pushforward(&self, density: &[f64], bins: usize) -> Result<Vec<f64>> {
        if bins == 0 {
            return Err(Error::input("pushforward needs at least one bin"));
        }
        match self {
            Body::Planar(b) => b.gauss_pushforward(density, bins),
            Body::Solid(b) => b.gauss_pushforward(density, bins, 2 * bins),
        }
    }

    /// Radius of the largest ball about [`Body::center`] contained in the
    /// body; a lower bound for the inradius, exact for symmetric bodies.
    pub fn inradius(&self) -> f64 {
        let c = self.center();
        let d = self
            .signed_distance(&c[..self.dim()])
            .expect("centre has the body's dimension");
        (-d).max(0.0)
    }

    pub fn volume_radius(&self) -> f64 {
        let n = self.dim();
        (self.volume() / unit_ball_volume(n)).powf(1.0 / n as f64)
    }

    pub fn surface_radius(&self) -> f64 {
        let n = self.dim();
        (self.surface_area() / unit_sphere_area(n)).powf(1.0 / (n - 1) as f64)
    }

    pub fn to_spec(&self) -> BodySpec {
        match self {
            Body::Planar(b) => BodySpec::Support2 {
                values: Some(b.values().to_vec()),
                r0: None,
                modes: None,
                random_seed: None,
                grid: None,
            },
            Body::Solid(b) => shape_spec(&b.shape, b.quadrature_order),
        }
    }
}

fn shape_spec(shape: &Shape3, order: usize) -> BodySpec {
    match shape {
        Shape3::Ball { center, radius } => BodySpec::Ball {
            dim: 3,
            center: Some(center.to_vec()),
            radius: *radius,
            grid: None,
            quadrature_order: Some(order),
        },
        Shape3::Ellipsoid {
            center,
            semi_axes,
            rotation,
        } => BodySpec::Ellipsoid {
            semi_axes: semi_axes.to_vec(),
            center: Some(center.to_vec()),
            rotation: Some(*rotation),
            angle: None,
            grid: None,
            quadrature_order: Some(order),
        },
        Shape3::Box { center, half_sides } => BodySpec::Box {
            half_sides: *half_sides,
            center: Some(*center),
        },
        Shape3::Combination(parts) => BodySpec::Combination {
            parts: parts
                .iter()
                .map(|(w, s)| (*w, shape_spec(s, order)))
                .collect(),
            quadrature_order: Some(order),
        },
    }
}

fn elementary_symmetric(k: &[f64], j: usize) -> f64 {
    // e_j by the usual dynamic programme.
    let mut e = vec![0.0; j + 1];
    e[0] = 1.0;
    for &x in k {
        for i in (1..=j).rev() {
            e[i] += e[i - 1] * x;
        }
    }
    e[j]
}

/// JSON body description, tagged by `kind`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    /// Planar support function: explicit samples, a Fourier series, or a
    /// seeded random smooth body.
    Support2 {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        values: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r0: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        modes: Option<Vec<(f64, f64)>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        random_seed: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid: Option<usize>,
    },
    Ball {
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quadrature_order: Option<usize>,
    },
    /// Two semi-axes give an ellipse, three an ellipsoid.
    Ellipsoid {
        semi_axes: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rotation: Option<[[f64; 3]; 3]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        angle: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quadrature_order: Option<usize>,
    },
    Box {
        half_sides: [f64; 3],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<[f64; 3]>,
    },
    /// Positive Minkowski combination of smooth solids.
    Combination {
        parts: Vec<(f64, BodySpec)>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quadrature_order: Option<usize>,
    },
}

fn point<const D: usize>(v: &Option<Vec<f64>>) -> Result<[f64; D]> {
    match v {
        None => Ok([0.0; D]),
        Some(c) if c.len() == D => {
            let mut out = [0.0; D];
            out.copy_from_slice(c);
            Ok(out)
        }
        Some(c) => Err(Error::input(format!(
            "centre has {} components, expected {D}",
            c.len()
        ))),
    }
}

impl BodySpec {
    pub fn dim(&self) -> usize {
        match self {
            BodySpec::Support2 { .. } => 2,
            BodySpec::Ball { dim, .. } => *dim,
            BodySpec::Ellipsoid { semi_axes, .. } => semi_axes.len(),
            BodySpec::Box { .. } | BodySpec::Combination { .. } => 3,
        }
    }

    pub fn build(&self) -> Result<Body> {
        match self {
            BodySpec::Support2 {
                values,
                r0,
                modes,
                random_seed,
                grid,
            } => {
                let n = grid.unwrap_or(DEFAULT_GRID);
                let body = match (values, modes, random_seed) {
                    (Some(v), None, None) => SupportBody2::new(v.clone())?,
                    (None, Some(m), None) => SupportBody2::from_fourier(
                        r0.ok_or_else(|| Error::input("Fourier body needs r0"))?,
                        m,
                        n,
                    )?,
                    (None, None, Some(seed)) => {
                        SupportBody2::random_smooth(*seed, r0.unwrap_or(1.0), n)
                    }
                    (None, None, None) if r0.is_some() => {
                        SupportBody2::from_fourier(r0.unwrap_or(1.0), &[], n)?
                    }
                    _ => {
                        return Err(Error::input(
                            "support2 body needs exactly one of values, modes or random_seed",
                        ))
                    }
                };
                Ok(Body::Planar(body))
            }
            BodySpec::Ball {
                dim,
                center,
                radius,
                grid,
                quadrature_order,
            } => match dim {
                2 => Ok(Body::Planar(SupportBody2::ball(
                    point::<2>(center)?,
                    *radius,
                    grid.unwrap_or(DEFAULT_GRID),
                )?)),
                3 => Ok(Body::Solid(ParamBody3::with_order(
                    Shape3::Ball {
                        center: point::<3>(center)?,
                        radius: *radius,
                    },
                    quadrature_order.unwrap_or(DEFAULT_QUADRATURE_ORDER),
                )?)),
                d => Err(Error::input(format!("ball dimension must be 2 or 3, got {d}"))),
            },
            BodySpec::Ellipsoid {
                semi_axes,
                center,
                rotation,
                angle,
                grid,
                quadrature_order,
            } => match semi_axes.len() {
                2 => Ok(Body::Planar(SupportBody2::ellipse(
                    point::<2>(center)?,
                    semi_axes[0],
                    semi_axes[1],
                    angle.unwrap_or(0.0),
                    grid.unwrap_or(DEFAULT_GRID),
                )?)),
                3 => Ok(Body::Solid(ParamBody3::with_order(
                    Shape3::Ellipsoid {
                        center: point::<3>(center)?,
                        semi_axes: [semi_axes[0], semi_axes[1], semi_axes[2]],
                        rotation: rotation.unwrap_or(IDENTITY),
                    },
                    quadrature_order.unwrap_or(DEFAULT_QUADRATURE_ORDER),
                )?)),
                d => Err(Error::input(format!(
                    "ellipsoid needs 2 or 3 semi-axes, got {d}"
                ))),
            },
            BodySpec::Box { half_sides, center } => Ok(Body::Solid(ParamBody3::new(Shape3::Box {
                center: center.unwrap_or([0.0; 3]),
                half_sides: *half_sides,
            })?)),
            BodySpec::Combination {
                parts,
                quadrature_order,
            } => {
                let shapes = parts
                    .iter()
                    .map(|(w, s)| match s.build()? {
                        Body::Solid(b) => Ok((*w, b.shape)),
                        Body::Planar(_) => {
                            Err(Error::input("combination members must be three-dimensional"))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Body::Solid(ParamBody3::with_order(
                    Shape3::Combination(shapes),
                    quadrature_order.unwrap_or(DEFAULT_QUADRATURE_ORDER),
                )?))
            }
        }
    }
}

/// Solid angle of the triangle `(a, b, c)` seen from the origin
/// (van Oosterom and Strackee).
pub(crate) fn solid_angle(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> f64 {
    let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
    let num = a.dot(&b.cross(c)).abs();
    let den = la * lb * lc + a.dot(b) * lc + a.dot(c) * lb + b.dot(c) * la;
    2.0 * num.atan2(den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use approx::assert_relative_eq;

    #[test]
    fn spec_round_trip() {
        let json = r#"{"kind":"ellipsoid","semi_axes":[2.0,1.5,1.0]}"#;
        let spec: BodySpec = serde_json::from_str(json).unwrap();
        let body = spec.build().unwrap();
        assert_eq!(body.dim(), 3);
        let again = body.to_spec().build().unwrap();
        assert_relative_eq!(again.volume(), body.volume(), max_relative = 1e-14);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let json = r#"{"kind":"ball","dim":3,"radius":1.0,"radious":2}"#;
        assert!(serde_json::from_str::<BodySpec>(json).is_err());
    }

    #[test]
    fn integral_mean_curvatures_of_ball() {
        let b = BodySpec::Ball {
            dim: 3,
            center: None,
            radius: 2.0,
            grid: None,
            quadrature_order: None,
        }
        .build()
        .unwrap();
        assert_relative_eq!(b.integral_mean_curvature(1).unwrap(), 8.0 * PI, max_relative = 1e-12);
        assert_relative_eq!(b.integral_mean_curvature(2).unwrap(), 4.0 * PI, max_relative = 1e-12);
        assert_relative_eq!(b.steiner_area(0.5).unwrap(), 4.0 * PI * 6.25, max_relative = 1e-12);
    }

    #[test]
    fn solid_angles_tile_the_sphere() {
        let e = [Vector3::x(), Vector3::y(), Vector3::z()];
        assert_relative_eq!(solid_angle(&e[0], &e[1], &e[2]), PI / 2.0, max_relative = 1e-14);
    }
}
