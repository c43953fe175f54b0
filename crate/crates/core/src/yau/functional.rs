use serde::{Deserialize, Serialize};

use super::density::MassDensity;
use crate::capacity::mesh::ExteriorMesh;
use crate::capacity::{smoothed_boundary_gradient, check_exponent, frozen_energy, resolve_like, solve_equilibrium, GridOptions, PotentialField};
use crate::error::{Error, Result};
use crate::geometry::{Body, SurfaceQuadrature};
use crate::numeric::gauss_legendre_on;

/// Which set function is subtracted from `∫_A h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Objective {
    Pcap { p: f64 },
    Surface,
    Volume,
}

impl Objective {
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            Objective::Pcap { p } => check_exponent(n, *p),
            _ => Ok(()),
        }
    }

    pub fn exponent(&self) -> Option<f64> {
        match self {
            Objective::Pcap { p } => Some(*p),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FunctionalOptions {
    /// Capacity discretization; the capacity is the energy of one solve at
    /// this resolution, so nearby bodies share the discretization.
    pub grid: GridOptions,
    /// Gauss–Legendre nodes along each ray of the cone quadrature for `∫_A h`.
    pub radial_nodes: usize,
}

impl Default for FunctionalOptions {
    fn default() -> Self {
        Self {
            grid: GridOptions::default(),
            radial_nodes: 48,
        }
    }
}

/// `F(A) = mass - penalty`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValue {
    pub value: f64,
    /// `∫_A h`.
    pub mass: f64,
    /// `pcap(A)`, `ℋ^{n-1}(∂A)` or `𝓛ⁿ(A)`.
    pub penalty: f64,
}

/// Directional derivative of `F` and its two parts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirstVariation {
    pub value: f64,
    /// `∫_{∂A} h_B h`.
    pub mass_term: f64,
    /// Derivative of the subtracted set function.
    pub penalty_term: f64,
}

fn boundary_rule(body: &Body, grid: &GridOptions) -> Result<SurfaceQuadrature> {
    if body.is_smooth() {
        body.curvature_quadrature()
    } else {
        Ok(ExteriorMesh::build(body, grid.mesh_size(body))?.quadrature())
    }
}

/// Smooth boundary quadrature; flat pieces make the Gauss map degenerate.
fn gauss_rule(body: &Body) -> Result<SurfaceQuadrature> {
    body.curvature_quadrature().map_err(|e| match e {
        Error::UnsupportedSmoothness(m) => Error::DegenerateGaussMap(m),
        other => other,
    })
}

/// `∫_A h` by cones over the boundary quadrature:
/// `Σ_i w_i ν_i·(x_i - c) ∫_0^1 h(c + s(x_i - c)) s^{n-1} ds`.
pub fn mass_integral(body: &Body, h: &MassDensity, opts: &FunctionalOptions) -> Result<f64> {
    let q = boundary_rule(body, &opts.grid)?;
    Ok(cone_integral(body, &q, h, opts.radial_nodes))
}

fn cone_integral(body: &Body, q: &SurfaceQuadrature, h: &MassDensity, nodes: usize) -> f64 {
    let n = body.dim();
    let c = body.center();
    let rule = gauss_legendre_on(nodes.max(2), 0.0, 1.0);
    q.integrate(|i| {
        let mut x = [0.0; 3];
        let p = q.points[i];
        let nu = q.normals[i];
        let height: f64 = (0..n).map(|k| nu[k] * (p[k] - c[k])).sum();
        let radial: f64 = rule
            .iter()
            .map(|(s, w)| {
                for k in 0..n {
                    x[k] = c[k] + s * (p[k] - c[k]);
                }
                w * h.eval(&x[..n]) * s.powi(n as i32 - 1)
            })
            .sum();
        height * radial
    })
}

fn check(body: &Body, h: &MassDensity, obj: &Objective) -> Result<()> {
    h.validate_for(body.dim())?;
    obj.validate(body.dim())
}

/// `F(A)` for the objective.
pub fn evaluate_f(body: &Body, h: &MassDensity, obj: &Objective, opts: &FunctionalOptions) -> Result<FunctionalValue> {
    check(body, h, obj)?;
    Ok(evaluate_with(body, h, obj, opts, None)?.0)
}

/// Evaluation that keeps the potential, warm-started from `warm` when it
/// shares the discretization.
pub(crate) fn evaluate_with(
    body: &Body,
    h: &MassDensity,
    obj: &Objective,
    opts: &FunctionalOptions,
    warm: Option<&PotentialField>,
) -> Result<(FunctionalValue, Option<PotentialField>)> {
    let mass = mass_integral(body, h, opts)?;
    let (penalty, field) = match obj {
        Objective::Pcap { p } => {
            let field = match warm {
                // A large shape change can leave the warm start far from the
                // minimizer; the radial guess of a cold solve is then better.
                Some(w) if w.dim() == body.dim() && w.p == *p => match resolve_like(body, w, opts.grid.tolerance) {
                    Err(Error::Solver { .. }) => solve_equilibrium(body, *p, &opts.grid)?,
                    other => other?,
                },
                _ => solve_equilibrium(body, *p, &opts.grid)?,
            };
            (field.energy, Some(field))
        }
        Objective::Surface => (body.surface_area(), None),
        Objective::Volume => (body.volume(), None),
    };
    Ok((
        FunctionalValue {
            value: mass - penalty,
            mass,
            penalty,
        },
        field,
    ))
}

/// Support of `dir` at the quadrature normals.
fn support_on(dir: &Body, q: &SurfaceQuadrature) -> Result<Vec<f64>> {
    if let Body::Planar(b) = dir {
        if b.grid_size() == q.len() {
            return Ok(b.values().to_vec());
        }
    }
    let n = dir.dim();
    q.normals.iter().map(|nu| dir.support(&nu[..n])).collect()
}

/// `d/dt F(A + tB)` at `t = 0`: the mass term from the boundary formula,
/// the capacity term as the shape derivative of the discrete energy with
/// the potential held fixed (exact for the discrete minimum by stationarity).
pub fn first_variation(
    a: &Body,
    b: &Body,
    h: &MassDensity,
    obj: &Objective,
    opts: &FunctionalOptions,
) -> Result<FirstVariation> {
    check(a, h, obj)?;
    if a.dim() != b.dim() {
        return Err(Error::input("bodies of different dimension"));
    }
    let q = gauss_rule(a)?;
    let h_dot = support_on(b, &q)?;
    let base = a.linear_perturbation(b, 0.0)?;
    let field = match obj {
        Objective::Pcap { p } => Some(solve_equilibrium(&base, *p, &opts.grid)?),
        _ => None,
    };
    variation_along(
        a,
        &q,
        &h_dot,
        field.as_ref(),
        &|t| a.linear_perturbation(b, t),
        h,
        obj,
    )
}

/// Derivative along a smooth family `t ↦ A_t` with `A_0 = A`, given the
/// normal velocity `h_dot` on the smooth quadrature of `A` and, for the
/// capacity objective, the potential solved on `A_0`.
pub(crate) fn variation_along(
    a: &Body,
    q: &SurfaceQuadrature,
    h_dot: &[f64],
    field: Option<&PotentialField>,
    family: &dyn Fn(f64) -> Result<Body>,
    h: &MassDensity,
    obj: &Objective,
) -> Result<FirstVariation> {
    let n = a.dim();
    let mass_term = q.integrate(|i| h_dot[i] * h.eval(&q.points[i][..n]));
    let speed = h_dot.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let penalty_term = if speed == 0.0 {
        0.0
    } else {
        match obj {
            Objective::Pcap { .. } => {
                let field = field.ok_or_else(|| Error::input("capacity variation needs a potential"))?;
                let d = 1e-3 * a.mean_width() / speed;
                let e = |t: f64| -> Result<f64> { frozen_energy(&family(t)?, field) };
                (8.0 * (e(d)? - e(-d)?) - (e(2.0 * d)? - e(-2.0 * d)?)) / (12.0 * d)
            }
            Objective::Surface => {
                let hm = q.mean_curvatures().expect("smooth quadrature");
                (n as f64 - 1.0) * q.integrate(|i| h_dot[i] * hm[i])
            }
            Objective::Volume => q.integrate(|i| h_dot[i]),
        }
    };
    Ok(FirstVariation {
        value: mass_term - penalty_term,
        mass_term,
        penalty_term,
    })
}

/// `max |target - h| / max h` over the boundary quadrature, with target
/// `(p-1)|∇u|^p`, `H` or `1/G`.
pub fn el_residual(body: &Body, h: &MassDensity, obj: &Objective, opts: &FunctionalOptions) -> Result<f64> {
    check(body, h, obj)?;
    let field = match obj {
        Objective::Pcap { p } => Some(solve_equilibrium(body, *p, &opts.grid)?),
        _ => None,
    };
    el_residual_with(body, h, obj, field.as_ref())
}

pub(crate) fn el_residual_with(
    body: &Body,
    h: &MassDensity,
    obj: &Objective,
    field: Option<&PotentialField>,
) -> Result<f64> {
    let n = body.dim();
    let (q, target) = match obj {
        Objective::Pcap { p } => {
            let field = field.ok_or_else(|| Error::input("capacity residual needs a potential"))?;
            let g = smoothed_boundary_gradient(field, if n == 2 { 1 } else { 2 });
            let t = g.iter().map(|v| (p - 1.0) * v.powf(*p)).collect();
            (field.boundary_quadrature(), t)
        }
        Objective::Surface => {
            let q = gauss_rule(body)?;
            let t = q.mean_curvatures().expect("smooth quadrature");
            (q, t)
        }
        Objective::Volume => {
            let q = gauss_rule(body)?;
            let t = q.gauss_curvatures().expect("smooth quadrature").iter().map(|g| 1.0 / g).collect();
            (q, t)
        }
    };
    let hv: Vec<f64> = q.points.iter().map(|x| h.eval(&x[..n])).collect();
    let scale = hv.iter().copied().fold(0.0, f64::max);
    let worst = hv
        .iter()
        .zip(&target)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(worst / scale)
}
