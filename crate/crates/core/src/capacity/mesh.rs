//! Body-fitted exterior meshes.
//!
//! A boundary sample `b_v` of `∂A` is joined to an interior centre `c` by
//! rays; layer `j` holds the nodes `c + s_j (b_v - c)` with `s_0 = 1` and a
//! geometric progression up to `s_max`. Each boundary cell swept between two
//! layers is split into simplices by the global-index diagonal rule, which
//! keeps neighbouring splits conforming.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geometry::{arr, solid_angle, v3, Body, ParamBody3, Shape3, SurfaceQuadrature};

/// Discretization sizes that fix the mesh topology independently of the body.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct MeshSize {
    /// 2D: stride over the support grid; 3D: cells per cube-face edge.
    pub angular: usize,
    pub layers: usize,
    pub s_max: f64,
}

impl MeshSize {
    /// Sizes from a target number of cells across the body and the relative
    /// outer radius. Radial spacing at `s = 1` is half the angular spacing.
    pub fn from_resolution(body: &Body, cells_per_width: f64, s_max: f64) -> Self {
        let (angular, dphi) = match body {
            Body::Planar(b) => {
                let n = b.grid_size();
                let target = (PI * cells_per_width).round().max(8.0) as usize;
                // Largest divisor of n that still gives `target` samples.
                let stride = (1..=n)
                    .rev()
                    .find(|d| n % d == 0 && n / d >= target)
                    .unwrap_or(1);
                (stride, 2.0 * PI * stride as f64 / n as f64)
            }
            Body::Solid(_) => {
                let m = (PI * cells_per_width / 4.0).ceil().max(2.0) as usize;
                (m, 0.5 * PI / m as f64)
            }
        };
        let ratio = 1.0 + 0.5 * dphi;
        let layers = (s_max.ln() / ratio.ln()).ceil().max(4.0) as usize;
        Self {
            angular,
            layers,
            s_max,
        }
    }

    /// Same angular sampling, outer radius multiplied by `factor` with the
    /// original layer spacing kept.
    pub fn extended(&self, factor: f64) -> Self {
        let q = self.s_max.powf(1.0 / self.layers as f64);
        let extra = (factor.ln() / q.ln()).round() as usize;
        Self {
            angular: self.angular,
            layers: self.layers + extra,
            s_max: q.powi((self.layers + extra) as i32),
        }
    }

    /// Half the resolution in every direction.
    pub fn coarsened(&self, body: &Body) -> Self {
        let angular = match body {
            Body::Planar(b) => {
                let n = b.grid_size();
                if n % (2 * self.angular) == 0 && n / (2 * self.angular) >= 8 {
                    2 * self.angular
                } else {
                    self.angular
                }
            }
            Body::Solid(_) => (self.angular / 2).max(2),
        };
        Self {
            angular,
            layers: (self.layers / 2).max(4),
            s_max: self.s_max,
        }
    }

    pub fn radii(&self) -> Vec<f64> {
        let q = self.s_max.powf(1.0 / self.layers as f64);
        (0..=self.layers).map(|j| q.powi(j as i32)).collect()
    }
}

#[derive(Clone, Debug)]
pub(crate) struct ExteriorMesh {
    pub dim: usize,
    pub center: [f64; 3],
    pub boundary: Vec<[f64; 3]>,
    pub normals: Vec<[f64; 3]>,
    /// Boundary quadrature weights at the vertices.
    pub weights: Vec<f64>,
    /// Principal curvatures at the boundary vertices (smooth bodies).
    pub curvatures: Option<Vec<Vec<f64>>>,
    /// Solid angle (arc length on the unit circle in 2D) owned by each ray.
    pub ray_angle: Vec<f64>,
    /// Boundary cells: segments (third index unused) or triangles.
    pub cells: Vec<[usize; 3]>,
    pub s: Vec<f64>,
}

impl ExteriorMesh {
    pub fn build(body: &Body, size: MeshSize) -> Result<Self> {
        if size.s_max < 2.0 {
            return Err(Error::Geometry(format!(
                "outer radius factor {} leaves the body outside half the truncation ball",
                size.s_max
            )));
        }
        let mut mesh = match body {
            Body::Planar(b) => {
                let rho = b.radius_of_curvature();
                let q = b.quadrature_with(&rho, size.angular);
                let nv = q.len();
                let cells = (0..nv).map(|i| [i, (i + 1) % nv, usize::MAX]).collect();
                let c = b.steiner_point();
                Self {
                    dim: 2,
                    center: [c[0], c[1], 0.0],
                    boundary: q.points,
                    normals: q.normals,
                    weights: q.weights,
                    curvatures: if b.is_smooth() {
                        q.principal_curvatures
                    } else {
                        None
                    },
                    ray_angle: Vec::new(),
                    cells,
                    s: size.radii(),
                }
            }
            Body::Solid(b) => Self::solid(b, size)?,
        };
        mesh.finish()?;
        Ok(mesh)
    }

    fn solid(body: &ParamBody3, size: MeshSize) -> Result<Self> {
        let uniform = matches!(body.shape, Shape3::Box { .. });
        let (dirs, cells) = cubed_sphere(size.angular, uniform);
        let c = body.shape.center();
        let mut boundary = Vec::with_capacity(dirs.len());
        let mut normals = Vec::with_capacity(dirs.len());
        for q in &dirs {
            let (y, n) = match &body.shape {
                Shape3::Box { half_sides, .. } => {
                    let y = c + Vector3::new(half_sides[0] * q.x, half_sides[1] * q.y, half_sides[2] * q.z);
                    let mut n = Vector3::zeros();
                    for i in 0..3 {
                        if (q[i].abs() - 1.0).abs() < 1e-12 {
                            n[i] = q[i].signum();
                        }
                    }
                    (y, n.normalize())
                }
                _ => body.boundary_sample(&q.normalize()),
            };
            boundary.push(arr(y));
            normals.push(arr(n));
        }
        let curvatures = body.is_smooth().then(|| {
            normals
                .iter()
                .map(|n| {
                    let (r1, r2) = body.shape.principal_radii(&v3(*n));
                    vec![1.0 / r2, 1.0 / r1]
                })
                .collect()
        });
        Ok(Self {
            dim: 3,
            center: arr(c),
            boundary,
            normals,
            weights: Vec::new(),
            curvatures,
            ray_angle: Vec::new(),
            cells,
            s: size.radii(),
        })
    }

    /// Ray angles, boundary weights (3D) and star-shapedness check.
    fn finish(&mut self) -> Result<()> {
        let c = v3(self.center);
        let nv = self.boundary.len();
        for (b, n) in self.boundary.iter().zip(&self.normals) {
            if (v3(*b) - c).dot(&v3(*n)) <= 0.0 {
                return Err(Error::Geometry(
                    "mesh centre is not interior to the body".into(),
                ));
            }
        }
        let mut angle = vec![0.0; nv];
        if self.dim == 2 {
            for cell in &self.cells {
                let a = v3(self.boundary[cell[0]]) - c;
                let b = v3(self.boundary[cell[1]]) - c;
                let t = (a.x * b.y - a.y * b.x).atan2(a.dot(&b)).abs();
                angle[cell[0]] += 0.5 * t;
                angle[cell[1]] += 0.5 * t;
            }
        } else {
            for cell in &self.cells {
                let [a, b, d] = cell.map(|i| v3(self.boundary[i]) - c);
                let w = solid_angle(&a, &b, &d) / 3.0;
                for &i in cell {
                    angle[i] += w;
                }
            }
            // dℋ² = r² dω / (ν·ω) on a star-shaped surface.
            self.weights = (0..nv)
                .map(|i| {
                    let r = v3(self.boundary[i]) - c;
                    let rn = r.norm();
                    angle[i] * rn * rn / (v3(self.normals[i]).dot(&r) / rn)
                })
                .collect();
        }
        self.ray_angle = angle;
        Ok(())
    }

    pub fn rays(&self) -> usize {
        self.boundary.len()
    }

    pub fn layers(&self) -> usize {
        self.s.len() - 1
    }

    /// Unknowns: every node off the boundary layer.
    pub fn unknowns(&self) -> usize {
        self.rays() * self.layers()
    }

    /// Global node id of ray `v`, layer `j`.
    pub fn node(&self, v: usize, j: usize) -> usize {
        v * (self.layers() + 1) + j
    }

    pub fn node_count(&self) -> usize {
        self.rays() * (self.layers() + 1)
    }

    /// Unknown index of a node, `None` on the boundary layer.
    pub fn unknown(&self, node: usize) -> Option<usize> {
        let l = self.layers() + 1;
        let (v, j) = (node / l, node % l);
        (j > 0).then(|| v * self.layers() + j - 1)
    }

    pub fn position(&self, node: usize) -> Vector3<f64> {
        let l = self.layers() + 1;
        let (v, j) = (node / l, node % l);
        let c = v3(self.center);
        c + (v3(self.boundary[v]) - c) * self.s[j]
    }

    pub fn positions(&self) -> Vec<Vector3<f64>> {
        (0..self.node_count()).map(|i| self.position(i)).collect()
    }

    /// Simplices as node ids (`dim + 1` valid entries).
    pub fn elements(&self) -> Vec<[usize; 4]> {
        let nl = self.layers();
        let mut out = Vec::with_capacity(self.cells.len() * nl * self.dim);
        for cell in &self.cells {
            if self.dim == 2 {
                let (a, b) = if cell[0] < cell[1] {
                    (cell[0], cell[1])
                } else {
                    (cell[1], cell[0])
                };
                for j in 0..nl {
                    let (a0, a1) = (self.node(a, j), self.node(a, j + 1));
                    let (b0, b1) = (self.node(b, j), self.node(b, j + 1));
                    out.push([a0, b0, b1, usize::MAX]);
                    out.push([a0, a1, b1, usize::MAX]);
                }
            } else {
                let mut s = *cell;
                s.sort_unstable();
                let [a, b, c] = s;
                for j in 0..nl {
                    let (a0, a1) = (self.node(a, j), self.node(a, j + 1));
                    let (b0, b1) = (self.node(b, j), self.node(b, j + 1));
                    let (c0, c1) = (self.node(c, j), self.node(c, j + 1));
                    out.push([a0, b0, c0, c1]);
                    out.push([a0, b0, b1, c1]);
                    out.push([a0, a1, b1, c1]);
                }
            }
        }
        out
    }

    /// Vertex quadrature of the sampled boundary.
    pub fn quadrature(&self) -> SurfaceQuadrature {
        SurfaceQuadrature {
            dim: self.dim,
            points: self.boundary.clone(),
            normals: self.normals.clone(),
            weights: self.weights.clone(),
            principal_curvatures: self.curvatures.clone(),
        }
    }
}

/// Cubed-sphere net: unit-cube surface points (not normalized) and triangles.
/// `uniform` spaces the face grid evenly, otherwise equiangularly.
pub(crate) fn cubed_sphere(m: usize, uniform: bool) -> (Vec<Vector3<f64>>, Vec<[usize; 3]>) {
    let coord = |i: usize| {
        if uniform {
            -1.0 + 2.0 * i as f64 / m as f64
        } else {
            (-0.25 * PI + 0.5 * PI * i as f64 / m as f64).tan()
        }
    };
    let coords: Vec<f64> = (0..=m)
        .map(|i| {
            // Pin the ends and the middle so shared edges dedupe exactly.
            if i == 0 {
                -1.0
            } else if i == m {
                1.0
            } else if 2 * i == m {
                0.0
            } else {
                coord(i)
            }
        })
        .collect();
    let faces: [(Vector3<f64>, Vector3<f64>, Vector3<f64>); 6] = [
        (Vector3::x(), Vector3::y(), Vector3::z()),
        (-Vector3::x(), Vector3::z(), Vector3::y()),
        (Vector3::y(), Vector3::z(), Vector3::x()),
        (-Vector3::y(), Vector3::x(), Vector3::z()),
        (Vector3::z(), Vector3::x(), Vector3::y()),
        (-Vector3::z(), Vector3::y(), Vector3::x()),
    ];
    let mut index: HashMap<[i64; 3], usize> = HashMap::new();
    let mut points = Vec::new();
    let mut tris = Vec::new();
    for (axis, u, w) in faces.iter() {
        let mut ids = vec![0usize; (m + 1) * (m + 1)];
        for i in 0..=m {
            for j in 0..=m {
                let q = axis + u * coords[i] + w * coords[j];
                let key = [q.x, q.y, q.z].map(|x| (x * 1e9).round() as i64);
                let id = *index.entry(key).or_insert_with(|| {
                    points.push(q);
                    points.len() - 1
                });
                ids[i * (m + 1) + j] = id;
            }
        }
        for i in 0..m {
            for j in 0..m {
                let v00 = ids[i * (m + 1) + j];
                let v10 = ids[(i + 1) * (m + 1) + j];
                let v01 = ids[i * (m + 1) + j + 1];
                let v11 = ids[(i + 1) * (m + 1) + j + 1];
                tris.push([v00, v10, v11]);
                tris.push([v00, v11, v01]);
            }
        }
    }
    (points, tris)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SupportBody2;
    use approx::assert_relative_eq;

    #[test]
    fn cubed_sphere_counts_and_angles() {
        let (p, t) = cubed_sphere(6, false);
        assert_eq!(p.len(), 6 * 36 + 2);
        assert_eq!(t.len(), 12 * 36);
        let total: f64 = t
            .iter()
            .map(|c| solid_angle(&p[c[0]], &p[c[1]], &p[c[2]]))
            .sum();
        assert_relative_eq!(total, 4.0 * PI, max_relative = 1e-12);
    }

    #[test]
    fn ball_mesh_weights_sum_to_area() {
        let b = Body::Solid(ParamBody3::ball([0.1, 0.0, -0.2], 2.0).unwrap());
        let mesh = ExteriorMesh::build(&b, MeshSize { angular: 12, layers: 8, s_max: 4.0 }).unwrap();
        let area: f64 = mesh.weights.iter().sum();
        assert_relative_eq!(area, 16.0 * PI, max_relative = 1e-12);
        let angle: f64 = mesh.ray_angle.iter().sum();
        assert_relative_eq!(angle, 4.0 * PI, max_relative = 1e-12);
    }

    #[test]
    fn planar_mesh_covers_annulus() {
        let b = Body::Planar(SupportBody2::ellipse([0.0, 0.0], 2.0, 1.0, 0.0, 720).unwrap());
        let size = MeshSize { angular: 4, layers: 10, s_max: 3.0 };
        let mesh = ExteriorMesh::build(&b, size).unwrap();
        let pos = mesh.positions();
        let area: f64 = mesh
            .elements()
            .iter()
            .map(|e| {
                let (a, b, c) = (pos[e[0]], pos[e[1]], pos[e[2]]);
                0.5 * ((b - a).x * (c - a).y - (b - a).y * (c - a).x).abs()
            })
            .sum();
        // Polygon sampled at normals: area of the scaled ring, up to polygon error.
        assert_relative_eq!(area, 2.0 * PI * (9.0 - 1.0), max_relative = 1e-3);
    }
}
