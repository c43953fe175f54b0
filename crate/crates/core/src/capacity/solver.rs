//! Regularized p-Dirichlet energy on an exterior mesh and its Newton minimizer.

use nalgebra::{Matrix2, Matrix3, Vector3};

use super::mesh::ExteriorMesh;
use super::sparse::{dot, pcg, Csr, IncompleteCholesky};
use crate::error::{Error, Result};
use crate::numeric::ordered_sum;

const NONE: u32 = u32::MAX;

/// Element geometry: volume and barycentric gradients.
#[derive(Clone, Copy)]
struct Simplex {
    vol: f64,
    grad: [Vector3<f64>; 4],
}

fn simplex(dim: usize, x: [Vector3<f64>; 4]) -> Option<Simplex> {
    if dim == 2 {
        let e = Matrix2::new(x[1].x - x[0].x, x[2].x - x[0].x, x[1].y - x[0].y, x[2].y - x[0].y);
        let det = e.determinant();
        let inv = e.try_inverse()?;
        let g1 = Vector3::new(inv[(0, 0)], inv[(0, 1)], 0.0);
        let g2 = Vector3::new(inv[(1, 0)], inv[(1, 1)], 0.0);
        Some(Simplex {
            vol: 0.5 * det.abs(),
            grad: [-(g1 + g2), g1, g2, Vector3::zeros()],
        })
    } else {
        let e = Matrix3::from_columns(&[x[1] - x[0], x[2] - x[0], x[3] - x[0]]);
        let det = e.determinant();
        let inv = e.try_inverse()?;
        let g: [Vector3<f64>; 3] = [0, 1, 2].map(|r| inv.row(r).transpose());
        Some(Simplex {
            vol: det.abs() / 6.0,
            grad: [-(g[0] + g[1] + g[2]), g[0], g[1], g[2]],
        })
    }
}

/// Element geometry, unknown maps and far-field tail weights of a mesh.
fn discretize(mesh: &ExteriorMesh, p: f64) -> (Vec<Simplex>, Vec<[u32; 4]>, Vec<f64>) {
    let n = mesh.dim as f64;
    let k = (n - p) / (p - 1.0);
    let positions = mesh.positions();
    let nv = mesh.dim + 1;
    let mut simplices = Vec::new();
    let mut local = Vec::new();
    for e in mesh.elements() {
        let mut x = [Vector3::zeros(); 4];
        for i in 0..nv {
            x[i] = positions[e[i]];
        }
        // Rays through coincident boundary samples give empty elements.
        let Some(s) = simplex(mesh.dim, x) else {
            continue;
        };
        if s.vol <= 0.0 || !s.grad.iter().all(|g| g.iter().all(|c| c.is_finite())) {
            continue;
        }
        simplices.push(s);
        let mut l = [NONE; 4];
        for i in 0..nv {
            l[i] = mesh.unknown(e[i]).map_or(NONE, |u| u as u32);
        }
        local.push(l);
    }
    let c = Vector3::from(mesh.center);
    let layers = mesh.layers();
    let tail = (0..mesh.rays())
        .map(|v| {
            let r = (positions[mesh.node(v, layers)] - c).norm();
            k.powf(p - 1.0) * mesh.ray_angle[v] * r.powf(n - p)
        })
        .collect();
    (simplices, local, tail)
}

/// Energy `Σ_T |T| (|∇u|² + ε²)^{p/2} + Σ_v c_v |u_v|^p` with the boundary
/// layer clamped to 1; the second sum is the radial far-field tail.
pub(crate) struct Problem {
    pub mesh: ExteriorMesh,
    pub p: f64,
    pub eps2: f64,
    simplices: Vec<Simplex>,
    /// Unknown index of each element vertex.
    local: Vec<[u32; 4]>,
    tail: Vec<f64>,
    hessian: Csr,
    /// CSR slots of the local Hessian entries, `(dim+1)²` per element.
    slots: Vec<u32>,
}

pub(crate) struct NewtonOutcome {
    pub energy: f64,
    pub iterations: usize,
    /// Final Newton decrement squared relative to the energy.
    pub decrement: f64,
}

impl Problem {
    pub fn new(mesh: ExteriorMesh, p: f64, epsilon: f64) -> Self {
        let (simplices, local, tail) = discretize(&mesh, p);
        let nv = mesh.dim + 1;
        let nu = mesh.unknowns();
        let mut pairs: Vec<(u32, u32)> = (0..nu as u32).map(|i| (i, i)).collect();
        for l in &local {
            for a in l.iter().take(nv) {
                for b in l.iter().take(nv) {
                    if *a != NONE && *b != NONE {
                        pairs.push((*a, *b));
                    }
                }
            }
        }
        let hessian = Csr::from_pattern(nu, pairs);
        let mut slots = Vec::with_capacity(local.len() * nv * nv);
        for l in &local {
            for a in 0..nv {
                for b in 0..nv {
                    slots.push(if l[a] != NONE && l[b] != NONE {
                        hessian.slot(l[a] as usize, l[b] as usize) as u32
                    } else {
                        NONE
                    });
                }
            }
        }
        Self {
            mesh,
            p,
            eps2: epsilon * epsilon,
            simplices,
            local,
            tail,
            hessian,
            slots,
        }
    }

    pub fn unknowns(&self) -> usize {
        self.mesh.unknowns()
    }

    fn tail_index(&self, v: usize) -> usize {
        v * self.mesh.layers() + self.mesh.layers() - 1
    }

    fn element_gradient(&self, e: usize, u: &[f64]) -> Vector3<f64> {
        let s = &self.simplices[e];
        let l = &self.local[e];
        let mut g = Vector3::zeros();
        for i in 0..=self.mesh.dim {
            let ui = if l[i] == NONE { 1.0 } else { u[l[i] as usize] };
            g += s.grad[i] * ui;
        }
        g
    }

    pub fn energy(&self, u: &[f64]) -> f64 {
        let half_p = 0.5 * self.p;
        let bulk = ordered_sum(self.simplices.len(), |e| {
            let g = self.element_gradient(e, u);
            self.simplices[e].vol * (g.norm_squared() + self.eps2).powf(half_p)
        });
        bulk + self.tail_energy(u)
    }

    fn tail_energy(&self, u: &[f64]) -> f64 {
        self.tail
            .iter()
            .enumerate()
            .map(|(v, c)| c * u[self.tail_index(v)].abs().powf(self.p))
            .sum()
    }

    /// Gradient and Hessian of the energy at `u` (Hessian kept internally).
    fn assemble(&mut self, u: &[f64]) -> Vec<f64> {
        let p = self.p;
        let nv = self.mesh.dim + 1;
        let mut grad = vec![0.0; self.unknowns()];
        self.hessian.clear();
        for e in 0..self.simplices.len() {
            let g = self.element_gradient(e, u);
            let s2 = g.norm_squared() + self.eps2;
            let a = p * s2.powf(0.5 * p - 1.0);
            let b = a * (p - 2.0) / s2;
            let s = &self.simplices[e];
            let l = &self.local[e];
            let mut gg = [0.0; 4];
            for (v, grad_i) in gg.iter_mut().zip(&s.grad[..nv]) {
                *v = grad_i.dot(&g);
            }
            for i in 0..nv {
                if l[i] != NONE {
                    grad[l[i] as usize] += s.vol * a * gg[i];
                }
            }
            let base = e * nv * nv;
            for i in 0..nv {
                for j in 0..nv {
                    let slot = self.slots[base + i * nv + j];
                    if slot != NONE {
                        let h = s.vol * (a * s.grad[i].dot(&s.grad[j]) + b * gg[i] * gg[j]);
                        self.hessian.vals[slot as usize] += h;
                    }
                }
            }
        }
        for v in 0..self.tail.len() {
            let i = self.tail_index(v);
            let c = self.tail[v];
            let x = u[i].abs().max(1e-300);
            grad[i] += c * p * x.powf(p - 1.0) * u[i].signum();
            let d = self.hessian.diag[i];
            self.hessian.vals[d] += c * p * (p - 1.0) * x.powf(p - 2.0);
        }
        grad
    }

    /// Damped Newton with Armijo backtracking; stops when the Newton
    /// decrement `λ² = -∇E·δ` falls below `tol·E`.
    pub fn minimize(&mut self, u: &mut [f64], tol: f64, max_iter: usize) -> Result<NewtonOutcome> {
        let n = self.unknowns();
        let mut energy = self.energy(u);
        let mut delta = vec![0.0; n];
        let mut trial = vec![0.0; n];
        let mut last = f64::INFINITY;
        for it in 0..max_iter {
            let grad = self.assemble(u);
            let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
            let pre = IncompleteCholesky::new(&self.hessian);
            let cg_tol = if last.is_finite() {
                (last.sqrt() * 1e-2).clamp(1e-10, 1e-4)
            } else {
                1e-4
            };
            let cg = pcg(&self.hessian, &pre, &rhs, &mut delta, cg_tol, 4000);
            if !cg.relative_residual.is_finite() {
                return Err(Error::Solver {
                    iterations: it,
                    residual: cg.relative_residual,
                });
            }
            let slope = dot(&grad, &delta);
            let decrement = -slope;
            if !(decrement >= 0.0) {
                return Err(Error::Solver {
                    iterations: it,
                    residual: decrement.abs() / energy,
                });
            }
            last = decrement / energy;
            if last <= tol {
                return Ok(NewtonOutcome {
                    energy,
                    iterations: it,
                    decrement: last,
                });
            }
            let mut t = 1.0;
            loop {
                for i in 0..n {
                    trial[i] = u[i] + t * delta[i];
                }
                let e = self.energy(&trial);
                if e <= energy + 1e-4 * t * slope {
                    u.copy_from_slice(&trial);
                    energy = e;
                    break;
                }
                t *= 0.5;
                if t < 1e-12 {
                    // Round-off floor: the decrement can no longer be resolved.
                    return if last <= tol.max(1e-13) * 1e3 {
                        Ok(NewtonOutcome {
                            energy,
                            iterations: it,
                            decrement: last,
                        })
                    } else {
                        Err(Error::Solver {
                            iterations: it,
                            residual: last,
                        })
                    };
                }
            }
        }
        Err(Error::Solver {
            iterations: max_iter,
            residual: last,
        })
    }

    /// Energy of fixed nodal values on another mesh with the same topology.
    pub fn energy_on(mesh: &ExteriorMesh, p: f64, epsilon: f64, u: &[f64]) -> f64 {
        let (simplices, local, tail) = discretize(mesh, p);
        Self {
            mesh: mesh.clone(),
            p,
            eps2: epsilon * epsilon,
            simplices,
            local,
            tail,
            hessian: Csr::from_pattern(0, Vec::new()),
            slots: Vec::new(),
        }
        .energy(u)
    }
}

