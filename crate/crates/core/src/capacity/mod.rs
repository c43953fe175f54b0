//! p-equilibrium potentials and variational p-capacity.
//!
//! The potential minimizes the regularized energy `∫ (|∇u|² + ε²)^{p/2}`
//! over P1 functions on a body-fitted exterior mesh, equal to 1 on `∂A`. Past
//! the outer layer the decaying radial mode `u ~ r^{-k}`, `k = (n-p)/(p-1)`,
//! is assumed on every ray, which contributes the exact tail energy
//! `k^{p-1} Ω R^{n-p} |u_R|^p` for a solid angle `Ω`.

pub(crate) mod mesh;
mod solver;
mod sparse;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{v3, Body, SurfaceQuadrature};
use crate::numeric::{binomial, integrate, one_sided_derivative, unit_sphere_area};
use mesh::{ExteriorMesh, MeshSize};
use solver::Problem;

/// Discretization controls, as read from experiment files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridOptions {
    /// Boundary resolution: samples per width of the body; `None` means
    /// 64 in the plane and 24 in space.
    pub cells_per_min_width: Option<f64>,
    /// Outer radius of the truncated domain relative to the body (along rays from its centre).
    pub outer_radius_factor: f64,
    /// Newton stopping rule: decrement² ≤ tolerance · energy.
    pub tolerance: f64,
    /// Energy regularization; `None` means `1e-8 / R_out`.
    pub epsilon: Option<f64>,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            cells_per_min_width: None,
            outer_radius_factor: 6.0,
            tolerance: 1e-8,
            epsilon: None,
        }
    }
}

impl GridOptions {
    pub fn validate(&self) -> Result<()> {
        if matches!(self.cells_per_min_width, Some(c) if !(c >= 4.0)) {
            return Err(Error::input("cells_per_min_width must be at least 4"));
        }
        if !(self.outer_radius_factor > 1.0) || !self.outer_radius_factor.is_finite() {
            return Err(Error::input("outer_radius_factor must exceed 1"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::input("tolerance must be positive"));
        }
        if matches!(self.epsilon, Some(e) if !(e >= 0.0)) {
            return Err(Error::input("epsilon must be nonnegative"));
        }
        Ok(())
    }

    pub(crate) fn mesh_size(&self, body: &Body) -> MeshSize {
        let cpw = self
            .cells_per_min_width
            .unwrap_or(if body.dim() == 2 { 64.0 } else { 24.0 });
        MeshSize::from_resolution(body, cpw, self.outer_radius_factor)
    }
}

/// Discrete p-equilibrium potential.
#[derive(Clone, Debug)]
pub struct PotentialField {
    pub p: f64,
    /// Nodal values, ray-major (`values[v·(L+1) + j]`, layer 0 on `∂A`).
    pub values: Vec<f64>,
    /// Minimal discrete energy (the energy route to the capacity).
    pub energy: f64,
    /// Final squared Newton decrement relative to the energy.
    pub residual: f64,
    pub newton_iterations: usize,
    pub epsilon: f64,
    pub(crate) mesh: ExteriorMesh,
    pub(crate) size: MeshSize,
}

impl PotentialField {
    pub fn dim(&self) -> usize {
        self.mesh.dim
    }

    pub fn rays(&self) -> usize {
        self.mesh.rays()
    }

    pub fn layers(&self) -> usize {
        self.mesh.layers()
    }

    /// Outer radius of the truncation, measured from the mesh centre.
    pub fn outer_radius(&self) -> f64 {
        let c = v3(self.mesh.center);
        self.mesh
            .boundary
            .iter()
            .map(|b| (v3(*b) - c).norm() * self.size.s_max)
            .fold(0.0, f64::max)
    }

    pub fn center(&self) -> [f64; 3] {
        self.mesh.center
    }

    pub fn node_positions(&self) -> Vec<[f64; 3]> {
        self.mesh.positions().into_iter().map(|x| [x.x, x.y, x.z]).collect()
    }

    /// Value at node `j` of ray `v`.
    pub fn value(&self, v: usize, j: usize) -> f64 {
        self.values[self.mesh.node(v, j)]
    }

    /// Relative radial parameters `s_j` of the layers.
    pub fn layer_parameters(&self) -> &[f64] {
        &self.mesh.s
    }

    /// Boundary vertices of the mesh with their quadrature weights; the
    /// sample on which [`boundary_gradient`] is reported.
    pub fn boundary_quadrature(&self) -> SurfaceQuadrature {
        self.mesh.quadrature()
    }

    /// Free values as the unknown vector of the solver.
    fn unknown_vector(&self) -> Vec<f64> {
        let l = self.layers();
        let mut u = Vec::with_capacity(self.rays() * l);
        for v in 0..self.rays() {
            for j in 1..=l {
                u.push(self.value(v, j));
            }
        }
        u
    }
}

/// Both routes to the capacity with the truncation and discretization diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub energy_route: f64,
    pub flux_route: f64,
    /// Energy route extrapolated from `R_out` and `2 R_out`.
    pub extrapolated: f64,
    /// Relative discretization estimate.
    pub relative_estimate: f64,
    pub coarse_energy: f64,
    pub extended_energy: f64,
    pub unknowns: usize,
    pub newton_iterations: usize,
}

impl CapacityResult {
    /// Best value: the extrapolated energy route.
    pub fn value(&self) -> f64 {
        self.extrapolated
    }
}

pub(crate) fn check_exponent(n: usize, p: f64) -> Result<()> {
    if !(p > 1.0 && p < n as f64) {
        return Err(Error::Parameter(format!("p must lie in (1,n); got p = {p}, n = {n}")));
    }
    Ok(())
}

/// `σ_{n-1} ((p-1)/(n-p))^{1-p} r^{n-p}`.
pub fn ball_capacity(n: usize, p: f64, r: f64) -> Result<f64> {
    check_exponent(n, p)?;
    if !(r >= 0.0) {
        return Err(Error::input("radius must be nonnegative"));
    }
    let nf = n as f64;
    Ok(unit_sphere_area(n) * ((p - 1.0) / (nf - p)).powf(1.0 - p) * r.powf(nf - p))
}

/// Radius of the ball with capacity `pcap`.
pub fn capacity_radius(n: usize, p: f64, pcap: f64) -> Result<f64> {
    check_exponent(n, p)?;
    let nf = n as f64;
    Ok(
        (((p - 1.0) / (nf - p)).powf(p - 1.0) * pcap / unit_sphere_area(n))
            .powf(1.0 / (nf - p)),
    )
}

fn radial_exponent(n: usize, p: f64) -> f64 {
    (n as f64 - p) / (p - 1.0)
}

pub(crate) fn solve_sized(
    body: &Body,
    p: f64,
    size: MeshSize,
    opts: &GridOptions,
    warm: Option<&PotentialField>,
) -> Result<PotentialField> {
    check_exponent(body.dim(), p)?;
    opts.validate()?;
    let mesh = ExteriorMesh::build(body, size)?;
    let c = v3(mesh.center);
    let r_out = mesh
        .boundary
        .iter()
        .map(|b| (v3(*b) - c).norm() * size.s_max)
        .fold(0.0, f64::max);
    let epsilon = opts.epsilon.unwrap_or(1e-8 / r_out);
    let k = radial_exponent(body.dim(), p);
    let layers = mesh.layers();
    let rays = mesh.rays();
    let mut u = Vec::with_capacity(rays * layers);
    for v in 0..rays {
        for j in 1..=layers {
            let guess = match warm {
                Some(w) if w.rays() == rays && j <= w.layers() => w.value(v, j),
                Some(w) if w.rays() == rays => {
                    let l = w.layers();
                    w.value(v, l) * (mesh.s[l] / mesh.s[j]).powf(k)
                }
                _ => mesh.s[j].powf(-k),
            };
            u.push(guess);
        }
    }
    let mut problem = Problem::new(mesh, p, epsilon);
    let out = problem.minimize(&mut u, opts.tolerance, 60)?;
    let mesh = problem.mesh;
    let mut values = Vec::with_capacity(mesh.node_count());
    for v in 0..rays {
        values.push(1.0);
        values.extend_from_slice(&u[v * layers..(v + 1) * layers]);
    }
    Ok(PotentialField {
        p,
        values,
        energy: out.energy,
        residual: out.decrement,
        newton_iterations: out.iterations,
        epsilon,
        mesh,
        size,
    })
}

/// Minimizes the discrete p-energy outside `body`.
pub fn solve_equilibrium(body: &Body, p: f64, opts: &GridOptions) -> Result<PotentialField> {
    solve_sized(body, p, opts.mesh_size(body), opts, None)
}

/// Solve reusing the mesh sizes of `field` (same topology, new geometry).
pub(crate) fn resolve_like(body: &Body, field: &PotentialField, tolerance: f64) -> Result<PotentialField> {
    let opts = GridOptions {
        tolerance,
        epsilon: Some(field.epsilon),
        ..GridOptions::default()
    };
    solve_sized(body, field.p, field.size, &opts, Some(field))
}

/// Energy of the nodal values of `field` transplanted onto the mesh of
/// `body` (same sizes). By stationarity its derivative along a shape
/// perturbation equals the derivative of the minimal energy.
pub(crate) fn frozen_energy(body: &Body, field: &PotentialField) -> Result<f64> {
    let mesh = ExteriorMesh::build(body, field.size)?;
    Ok(Problem::energy_on(&mesh, field.p, field.epsilon, &field.unknown_vector()))
}

/// `|∇u|` at the boundary vertices from a one-sided second-order difference
/// along each ray; aligned with [`PotentialField::boundary_quadrature`].
pub fn boundary_gradient(field: &PotentialField) -> Vec<f64> {
    let c = v3(field.mesh.center);
    let s = &field.mesh.s;
    (0..field.rays())
        .map(|v| {
            let b = v3(field.mesh.boundary[v]);
            let nu = v3(field.mesh.normals[v]);
            let du = one_sided_derivative(
                [s[0], s[1], s[2]],
                [field.value(v, 0), field.value(v, 1), field.value(v, 2)],
            );
            du.abs() / nu.dot(&(b - c))
        })
        .collect()
}

/// [`boundary_gradient`] averaged over `rings` neighbourhood rings of each
/// vertex with the quadrature weights; removes the local error at the
/// irregular vertices of the solid mesh (the cube corners of the net).
pub fn smoothed_boundary_gradient(field: &PotentialField, rings: usize) -> Vec<f64> {
    let g = boundary_gradient(field);
    let rays = field.rays();
    let arity = if field.dim() == 2 { 2 } else { 3 };
    let mut adjacent: Vec<Vec<usize>> = vec![Vec::new(); rays];
    for cell in &field.mesh.cells {
        for a in &cell[..arity] {
            for b in &cell[..arity] {
                if a != b && !adjacent[*a].contains(b) {
                    adjacent[*a].push(*b);
                }
            }
        }
    }
    let w = &field.mesh.weights;
    let mut mark = vec![usize::MAX; rays];
    (0..rays)
        .map(|v| {
            let mut patch = vec![v];
            mark[v] = v;
            let mut start = 0;
            for _ in 0..rings {
                let end = patch.len();
                for i in start..end {
                    for &b in &adjacent[patch[i]] {
                        if mark[b] != v {
                            mark[b] = v;
                            patch.push(b);
                        }
                    }
                }
                start = end;
            }
            let total: f64 = patch.iter().map(|i| w[*i]).sum();
            patch.iter().map(|i| w[*i] * g[*i]).sum::<f64>() / total
        })
        .collect()
}

/// Flux route `∫_{∂A} |∇u|^{p-1}`.
pub fn flux_capacity(field: &PotentialField) -> f64 {
    let q = field.mesh.quadrature();
    let g = boundary_gradient(field);
    q.integrate(|i| g[i].powf(field.p - 1.0))
}

/// Capacity by both routes, with Richardson extrapolation over the outer
/// radius and a coarse-mesh discretization estimate.
pub fn capacity(body: &Body, p: f64, opts: &GridOptions) -> Result<CapacityResult> {
    let size = opts.mesh_size(body);
    let fine = solve_sized(body, p, size, opts, None)?;
    let extended = solve_sized(body, p, size.extended(2.0), opts, Some(&fine))?;
    let coarse = solve_sized(body, p, size.coarsened(body), opts, None)?;
    let flux = flux_capacity(&fine);
    let coarse_flux = flux_capacity(&coarse);
    let n = body.dim() as f64;
    let correction = (extended.energy - fine.energy) / (2f64.powf(n) - 1.0);
    let extrapolated = extended.energy + correction;
    let spread = (fine.energy - coarse.energy)
        .abs()
        .max((flux - coarse_flux).abs());
    // The gap between the routes dominates near edges and corners.
    let route_gap = (flux - fine.energy).abs();
    let relative_estimate = (spread
        + (extended.energy - fine.energy).abs()
        + correction.abs()
        + route_gap)
        / fine.energy;
    Ok(CapacityResult {
        energy_route: fine.energy,
        flux_route: flux,
        extrapolated,
        relative_estimate,
        coarse_energy: coarse.energy,
        extended_energy: extended.energy,
        unknowns: fine.values.len() - fine.rays(),
        newton_iterations: fine.newton_iterations,
    })
}

/// Upper bound `(∫_0^∞ S(t)^{1/(1-p)} dt)^{1-p}` with
/// `S(t) = ∫_{∂A} (1 + tH)^{n-1}`.
pub fn gehring_upper_bound(body: &Body, p: f64) -> Result<f64> {
    let n = body.dim();
    check_exponent(n, p)?;
    let q = body.curvature_quadrature()?;
    let h = q.mean_curvatures().expect("smooth quadrature");
    // S(t) = Σ_j C(n-1, j) t^j ∫ H^j.
    let coef: Vec<f64> = (0..n)
        .map(|j| binomial(n - 1, j) * q.integrate(|i| h[i].powi(j as i32)))
        .collect();
    let s = |t: f64| coef.iter().rev().fold(0.0, |acc, c| acc * t + c);
    let e = 1.0 / (1.0 - p);
    // Split at the scale where the leading term dominates.
    let t0 = coef[0] / coef[n - 1].max(f64::MIN_POSITIVE);
    let t0 = t0.powf(1.0 / (n - 1) as f64).max(1e-12);
    let head = integrate(|t| s(t).powf(e), 0.0, t0, 0.0, 1e-12);
    // ∫_{t0}^∞ t^{-(a+1)} g(t) dt with g = (S/t^{n-1})^e and t = t0 w^{-1/a}.
    let a = (n - 1) as f64 / (p - 1.0) - 1.0;
    let g = |t: f64| (s(t) / t.powi(n as i32 - 1)).powf(e);
    let tail = t0.powf(-a) / a
        * integrate(
            |w: f64| {
                if w <= 0.0 {
                    coef[n - 1].powf(e)
                } else {
                    g(t0 * w.powf(-1.0 / a))
                }
            },
            0.0,
            1.0,
            0.0,
            1e-12,
        );
    Ok((head + tail).powf(1.0 - p))
}

/// Which comparison the barrier is used for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierSide {
    /// `κ = α`, a lower curvature bound: the barrier dominates the potential.
    LowerAlpha,
    /// `κ = β`, an upper curvature bound: the potential dominates the barrier.
    UpperBeta,
}

/// `φ(d(x, A))` with `φ(t) = (1 + κt)^{(p-n)/(p-1)}`.
pub fn barrier_profile(body: &Body, p: f64, kappa: f64, _side: BarrierSide, x: &[f64]) -> Result<f64> {
    let n = body.dim();
    check_exponent(n, p)?;
    if !(kappa > 0.0) {
        return Err(Error::input("curvature bound must be positive"));
    }
    let d = body.signed_distance(x)?;
    if d < -1e-9 * body.diameter() {
        return Err(Error::Domain(format!(
            "barrier evaluated inside the body (signed distance {d:e})"
        )));
    }
    Ok((1.0 + kappa * d.max(0.0)).powf(-radial_exponent(n, p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ParamBody3, SupportBody2};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn ball_formula() {
        assert_relative_eq!(ball_capacity(3, 2.0, 1.0).unwrap(), 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(ball_capacity(2, 1.5, 1.0).unwrap(), 2.0 * PI, max_relative = 1e-14);
        assert!(ball_capacity(3, 3.0, 1.0).is_err());
        assert_relative_eq!(capacity_radius(3, 2.5, ball_capacity(3, 2.5, 1.7).unwrap()).unwrap(), 1.7, max_relative = 1e-12);
    }

    #[test]
    fn gehring_is_sharp_on_balls() {
        let b3 = Body::Solid(ParamBody3::ball([0.0; 3], 1.3).unwrap());
        for p in [1.5, 2.0, 2.5] {
            assert_relative_eq!(
                gehring_upper_bound(&b3, p).unwrap(),
                ball_capacity(3, p, 1.3).unwrap(),
                max_relative = 1e-9
            );
        }
        let b2 = Body::Planar(SupportBody2::ball([0.2, 0.0], 0.7, 256).unwrap());
        assert_relative_eq!(
            gehring_upper_bound(&b2, 1.5).unwrap(),
            ball_capacity(2, 1.5, 0.7).unwrap(),
            max_relative = 1e-9
        );
    }

    #[test]
    fn planar_ball_capacity_converges() {
        let b = Body::Planar(SupportBody2::ball([0.0, 0.0], 1.0, 720).unwrap());
        let f = solve_equilibrium(&b, 1.5, &GridOptions::default()).unwrap();
        assert_relative_eq!(f.energy, 2.0 * PI, max_relative = 5e-3);
    }
}
