use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::density::MassDensity;
use super::functional::{el_residual_with, evaluate_with, variation_along, FunctionalOptions, FunctionalValue, Objective};
use crate::capacity::PotentialField;
use crate::error::{Error, Result};
use crate::geometry::{Body, BodySpec, ParamBody3, Shape3, SupportBody2, SurfaceQuadrature, DEFAULT_GRID};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaximizeOptions {
    pub functional: FunctionalOptions,
    /// Highest Fourier mode of the planar support function.
    pub fourier_order: usize,
    pub max_iterations: usize,
    /// Stop when `‖∇F‖·size ≤ tol·(mass + penalty)`.
    pub gradient_tolerance: f64,
    /// Stop when the step falls below this fraction of the body size.
    pub step_tolerance: f64,
    /// First step as a fraction of the body size.
    pub initial_step: f64,
    /// Collapse when the inradius falls below this fraction of the initial one.
    pub collapse_fraction: f64,
    /// Diameter beyond which the ascent is declared unbounded; `None` means
    /// 1000 times the initial diameter.
    pub max_diameter: Option<f64>,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        Self {
            functional: FunctionalOptions::default(),
            fourier_order: 6,
            max_iterations: 200,
            gradient_tolerance: 1e-7,
            step_tolerance: 1e-6,
            initial_step: 0.1,
            collapse_fraction: 1e-3,
            max_diameter: None,
        }
    }
}

/// One accepted iterate of the ascent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimState {
    pub iteration: usize,
    /// Last admissible body; at a collapse, the body before the collapsing step.
    pub body: BodySpec,
    pub value: f64,
    pub mass: f64,
    pub penalty: f64,
    /// Step length that produced this iterate.
    pub step: f64,
    pub gradient_norm: f64,
    /// Sup-norm Euler–Lagrange residual; absent after a collapse.
    pub el_residual: Option<f64>,
    pub inradius: f64,
    pub collapsed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Stationary,
    StepTolerance,
    Collapsed,
    IterationCap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub states: Vec<OptimState>,
    pub termination: Termination,
}

impl Trace {
    pub fn last(&self) -> &OptimState {
        self.states.last().expect("trace holds the initial state")
    }

    pub fn collapsed(&self) -> bool {
        self.termination == Termination::Collapsed
    }

    pub fn witness(&self) -> Result<Body> {
        self.last().body.build()
    }
}

/// Coordinates of the search space.
#[derive(Clone, Debug)]
enum Family {
    /// `h(θ) = a0 + Σ a_m cos mθ + b_m sin mθ` on a fixed grid.
    Fourier { grid: usize, order: usize },
    /// Centre and radius.
    Ball { order: usize },
    /// Centre and semi-axes along fixed directions.
    Ellipsoid { rotation: [[f64; 3]; 3], order: usize },
}

impl Family {
    fn from_body(body: &Body, fourier_order: usize) -> Result<(Family, Vec<f64>)> {
        match body {
            Body::Planar(b) => {
                let grid = b.grid_size();
                let order = fourier_order.clamp(1, grid / 2 - 1);
                let dt = b.dtheta();
                let vals = b.values();
                let mut c = vec![vals.iter().sum::<f64>() / grid as f64];
                for m in 1..=order {
                    let (mut a, mut s) = (0.0, 0.0);
                    for (k, v) in vals.iter().enumerate() {
                        let t = m as f64 * k as f64 * dt;
                        a += v * t.cos();
                        s += v * t.sin();
                    }
                    c.push(2.0 * a / grid as f64);
                    c.push(2.0 * s / grid as f64);
                }
                Ok((Family::Fourier { grid, order }, c))
            }
            Body::Solid(b) => match &b.shape {
                Shape3::Ball { center, radius } => Ok((
                    Family::Ball {
                        order: b.quadrature_order,
                    },
                    vec![center[0], center[1], center[2], *radius],
                )),
                Shape3::Ellipsoid {
                    center,
                    semi_axes,
                    rotation,
                } => Ok((
                    Family::Ellipsoid {
                        rotation: *rotation,
                        order: b.quadrature_order,
                    },
                    vec![center[0], center[1], center[2], semi_axes[0], semi_axes[1], semi_axes[2]],
                )),
                _ => Err(Error::input(
                    "solid maximization starts from a ball or an ellipsoid",
                )),
            },
        }
    }

    fn build(&self, c: &[f64]) -> Result<Body> {
        match self {
            Family::Fourier { grid, order } => {
                let dt = 2.0 * PI / *grid as f64;
                let values = (0..*grid)
                    .map(|k| {
                        let t = k as f64 * dt;
                        c[0] + (1..=*order)
                            .map(|m| {
                                let mt = m as f64 * t;
                                c[2 * m - 1] * mt.cos() + c[2 * m] * mt.sin()
                            })
                            .sum::<f64>()
                    })
                    .collect();
                Ok(Body::Planar(SupportBody2::new_unchecked(values)))
            }
            Family::Ball { order } => Ok(Body::Solid(ParamBody3::with_order(
                Shape3::Ball {
                    center: [c[0], c[1], c[2]],
                    radius: c[3],
                },
                *order,
            )?)),
            Family::Ellipsoid { rotation, order } => {
                // Sort the axes, carrying the rotation columns along.
                let mut idx = [0usize, 1, 2];
                idx.sort_by(|&i, &j| c[3 + j].total_cmp(&c[3 + i]));
                let axes = idx.map(|i| c[3 + i]);
                let mut rot = [[0.0; 3]; 3];
                for (col, &i) in idx.iter().enumerate() {
                    for row in 0..3 {
                        rot[row][col] = rotation[row][i];
                    }
                }
                Ok(Body::Solid(ParamBody3::with_order(
                    Shape3::Ellipsoid {
                        center: [c[0], c[1], c[2]],
                        semi_axes: axes,
                        rotation: rot,
                    },
                    *order,
                )?))
            }
        }
    }

    /// Scale of the body: mean support, radius or largest axis.
    fn size(&self, c: &[f64]) -> f64 {
        match self {
            Family::Fourier { .. } => c[0],
            Family::Ball { .. } => c[3],
            Family::Ellipsoid { .. } => c[3].max(c[4]).max(c[5]),
        }
    }

    /// Smallest extent; nonpositive means the body has degenerated.
    fn thickness(&self, c: &[f64]) -> f64 {
        match self {
            Family::Fourier { .. } => c[0],
            Family::Ball { .. } => c[3],
            Family::Ellipsoid { .. } => c[3].min(c[4]).min(c[5]),
        }
    }

    /// `L²` norm² of the unit support perturbation of each coordinate on the
    /// unit sphere; used to precondition the gradient.
    fn metric(&self, j: usize) -> f64 {
        match self {
            Family::Fourier { .. } => {
                if j == 0 {
                    2.0 * PI
                } else {
                    PI
                }
            }
            Family::Ball { .. } => {
                if j < 3 {
                    4.0 * PI / 3.0
                } else {
                    4.0 * PI
                }
            }
            Family::Ellipsoid { .. } => {
                if j < 3 {
                    4.0 * PI / 3.0
                } else {
                    4.0 * PI / 5.0
                }
            }
        }
    }

    /// Shrinks modes `m ≥ 2` until `h + h'' ≥ 0.01 a0` everywhere.
    fn project(&self, c: &mut [f64]) {
        let Family::Fourier { grid, order } = self else {
            return;
        };
        if c[0] <= 0.0 {
            return;
        }
        let dt = 2.0 * PI / *grid as f64;
        let worst = (0..*grid)
            .map(|k| {
                let t = k as f64 * dt;
                (2..=*order)
                    .map(|m| {
                        let mt = m as f64 * t;
                        (1.0 - (m * m) as f64) * (c[2 * m - 1] * mt.cos() + c[2 * m] * mt.sin())
                    })
                    .sum::<f64>()
            })
            .fold(0.0f64, |w, r| w.max(-r));
        let room = 0.99 * c[0];
        if worst > room {
            let lambda = room / worst;
            for v in c.iter_mut().skip(3) {
                *v *= lambda;
            }
        }
    }
}

struct Iterate {
    params: Vec<f64>,
    body: Body,
    f: FunctionalValue,
    field: Option<PotentialField>,
}

fn support_values(body: &Body, q: &SurfaceQuadrature) -> Result<Vec<f64>> {
    match body {
        Body::Planar(b) if b.grid_size() == q.len() => Ok(b.values().to_vec()),
        _ => {
            let n = body.dim();
            q.normals.iter().map(|nu| body.support(&nu[..n])).collect()
        }
    }
}

fn gradient(
    family: &Family,
    it: &Iterate,
    h: &MassDensity,
    obj: &Objective,
) -> Result<Vec<f64>> {
    let q = it.body.curvature_quadrature()?;
    let delta = 1e-4 * family.size(&it.params);
    (0..it.params.len())
        .map(|j| {
            let at = |t: f64| {
                let mut c = it.params.clone();
                c[j] += t;
                family.build(&c)
            };
            let plus = support_values(&at(delta)?, &q)?;
            let minus = support_values(&at(-delta)?, &q)?;
            let h_dot: Vec<f64> = plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * delta)).collect();
            Ok(variation_along(&it.body, &q, &h_dot, it.field.as_ref(), &at, h, obj)?.value)
        })
        .collect()
}

fn state(iteration: usize, it: &Iterate, step: f64, gnorm: f64, h: &MassDensity, obj: &Objective) -> Result<OptimState> {
    Ok(OptimState {
        iteration,
        body: it.body.to_spec(),
        value: it.f.value,
        mass: it.f.mass,
        penalty: it.f.penalty,
        step,
        gradient_norm: gnorm,
        el_residual: Some(el_residual_with(&it.body, h, obj, it.field.as_ref())?),
        inradius: it.body.inradius(),
        collapsed: false,
    })
}

/// Projected gradient ascent of `F` from `init`. Planar bodies move in the
/// Fourier coefficients of the support function; solid bodies in the
/// coordinates of their parametric family.
pub fn maximize(h: &MassDensity, obj: &Objective, init: &Body, opts: &MaximizeOptions) -> Result<Trace> {
    let n = init.dim();
    h.validate_for(n)?;
    obj.validate(n)?;
    let (family, mut params) = Family::from_body(init, opts.fourier_order)?;
    family.project(&mut params);
    let body = family.build(&params)?;
    if !body.is_smooth() {
        return Err(Error::input("initial body must be smooth and strictly convex"));
    }
    let (f, field) = evaluate_with(&body, h, obj, &opts.functional, None)?;
    let mut cur = Iterate {
        params,
        body,
        f,
        field,
    };
    let r0 = cur.body.inradius();
    let threshold = opts.collapse_fraction * r0;
    let max_diameter = opts.max_diameter.unwrap_or(1e3 * cur.body.diameter());
    let mut tau = opts.initial_step * family.size(&cur.params);
    let mut states = vec![state(0, &cur, 0.0, f64::NAN, h, obj)?];
    let mut accepted = 0;
    let termination = loop {
        if accepted >= opts.max_iterations {
            break Termination::IterationCap;
        }
        let g = gradient(&family, &cur, h, obj)?;
        let d: Vec<f64> = g.iter().enumerate().map(|(j, v)| v / family.metric(j)).collect();
        let gnorm = g.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>().sqrt();
        let size = family.size(&cur.params);
        if let Some(s) = states.last_mut() {
            s.gradient_norm = gnorm;
        }
        if gnorm * size <= opts.gradient_tolerance * (cur.f.mass.abs() + cur.f.penalty.abs()) {
            break Termination::Stationary;
        }
        let dnorm = d
            .iter()
            .enumerate()
            .map(|(j, v)| family.metric(j) * v * v)
            .sum::<f64>()
            .sqrt();
        let dir: Vec<f64> = d.iter().map(|v| v / dnorm).collect();
        let slope: f64 = g.iter().zip(&dir).map(|(a, b)| a * b).sum();
        tau = tau.min(size);
        let stop = loop {
            if tau < opts.step_tolerance * size {
                break Some(Termination::StepTolerance);
            }
            let mut trial: Vec<f64> = cur.params.iter().zip(&dir).map(|(c, v)| c + tau * v).collect();
            family.project(&mut trial);
            let collapsing = family.thickness(&trial) <= threshold || {
                let b = family.build(&trial)?;
                b.inradius() < threshold
            };
            if collapsing {
                if cur.f.value < 0.0 {
                    // The point limit F → 0 improves on every negative value.
                    let trial_r = if family.thickness(&trial) > 0.0 {
                        family.build(&trial)?.inradius()
                    } else {
                        0.0
                    };
                    states.push(OptimState {
                        iteration: accepted + 1,
                        body: cur.body.to_spec(),
                        value: 0.0,
                        mass: 0.0,
                        penalty: 0.0,
                        step: tau,
                        gradient_norm: gnorm,
                        el_residual: None,
                        inradius: trial_r,
                        collapsed: true,
                    });
                    break Some(Termination::Collapsed);
                }
                tau *= 0.5;
                continue;
            }
            let body = family.build(&trial)?;
            let diameter = body.diameter();
            if diameter > max_diameter {
                return Err(Error::UnboundedGrowth { diameter });
            }
            let (f, field) = evaluate_with(&body, h, obj, &opts.functional, cur.field.as_ref())?;
            if f.value >= cur.f.value + 1e-4 * tau * slope {
                cur = Iterate {
                    params: trial,
                    body,
                    f,
                    field,
                };
                accepted += 1;
                states.push(state(accepted, &cur, tau, f64::NAN, h, obj)?);
                tau *= 2.0;
                break None;
            }
            tau *= 0.5;
        };
        if let Some(t) = stop {
            break t;
        }
    };
    Ok(Trace {
        states,
        termination,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchOptions {
    pub dim: usize,
    pub starts: usize,
    pub seed: u64,
    /// Initial radii in units of the density's length scale, cycled over starts.
    pub radii: Vec<f64>,
    /// Planar support grid of the initial bodies.
    pub grid_size: usize,
    pub maximize: MaximizeOptions,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            dim: 2,
            starts: 4,
            seed: 0,
            radii: vec![1.0, 2.0, 4.0, 0.5],
            grid_size: DEFAULT_GRID,
            maximize: MaximizeOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartSummary {
    pub start: usize,
    pub value: f64,
    pub collapsed: bool,
    pub iterations: usize,
    pub termination: Termination,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Attainment {
    pub attained: bool,
    /// Best non-collapsed body when attained.
    pub witness: Option<BodySpec>,
    /// Best value; 0 for the degenerate point limit.
    pub value: f64,
    pub best_start: Option<usize>,
    pub starts: Vec<StartSummary>,
}

impl Attainment {
    pub fn degenerate(&self) -> bool {
        !self.attained
    }
}

/// Seeded initial balls around the density centre.
pub fn initial_bodies(h: &MassDensity, opts: &SearchOptions) -> Result<Vec<Body>> {
    if !(opts.dim == 2 || opts.dim == 3) {
        return Err(Error::input("dimension must be 2 or 3"));
    }
    if opts.starts == 0 || opts.radii.is_empty() || opts.radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::input("search needs at least one start and positive radii"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let c = h.center(opts.dim);
    let l = h.length_scale();
    (0..opts.starts)
        .map(|i| {
            let jitter: f64 = rng.gen_range(0.9..1.1);
            let r = l * opts.radii[i % opts.radii.len()] * if i == 0 { 1.0 } else { jitter };
            let offset: Vec<f64> = (0..opts.dim)
                .map(|_| if i == 0 { 0.0 } else { 0.25 * l * rng.gen_range(-1.0..1.0) })
                .collect();
            let center: Vec<f64> = c.iter().zip(&offset).map(|(a, b)| a + b).collect();
            Ok(if opts.dim == 2 {
                Body::Planar(SupportBody2::ball([center[0], center[1]], r, opts.grid_size)?)
            } else {
                Body::Solid(ParamBody3::ball([center[0], center[1], center[2]], r)?)
            })
        })
        .collect()
}

/// Multi-start maximization; attained iff the best non-collapsed start has `F ≥ 0`.
pub fn attainment_check(h: &MassDensity, obj: &Objective, opts: &SearchOptions) -> Result<(Attainment, Vec<Trace>)> {
    let bodies = initial_bodies(h, opts)?;
    let traces: Vec<Result<Trace>> = bodies
        .par_iter()
        .map(|b| maximize(h, obj, b, &opts.maximize))
        .collect();
    let traces: Vec<Trace> = traces.into_iter().collect::<Result<_>>()?;
    let starts: Vec<StartSummary> = traces
        .iter()
        .enumerate()
        .map(|(i, t)| StartSummary {
            start: i,
            value: t.last().value,
            collapsed: t.collapsed(),
            iterations: t.states.len() - 1,
            termination: t.termination,
        })
        .collect();
    let best = starts
        .iter()
        .filter(|s| !s.collapsed)
        .fold(None::<&StartSummary>, |best, s| match best {
            Some(b) if b.value >= s.value => Some(b),
            _ => Some(s),
        });
    let attainment = match best {
        Some(b) if b.value >= 0.0 => Attainment {
            attained: true,
            witness: Some(traces[b.start].last().body.clone()),
            value: b.value,
            best_start: Some(b.start),
            starts,
        },
        _ => Attainment {
            attained: false,
            witness: None,
            value: 0.0,
            best_start: None,
            starts,
        },
    };
    Ok((attainment, traces))
}
