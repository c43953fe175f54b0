//! Radii of a convex body and the inequalities between them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::capacity::{capacity, capacity_radius, check_exponent, gehring_upper_bound, CapacityResult, GridOptions};
use crate::error::{Error, Result};
use crate::geometry::Body;
use crate::numeric::unit_sphere_area;

pub const DEFAULT_TOLERANCE: f64 = 0.02;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityRecord {
    pub name: String,
    pub lhs_name: String,
    pub rhs_name: String,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    /// `(rhs - lhs)/rhs`; negative when the inequality is violated.
    pub slack: Option<f64>,
    pub p_range: String,
    pub applicable: bool,
    pub pass: bool,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl InequalityRecord {
    fn check(name: &str, lhs_name: &str, rhs_name: &str, lhs: f64, rhs: f64, p_range: &str, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            lhs_name: lhs_name.into(),
            rhs_name: rhs_name.into(),
            lhs: Some(lhs),
            rhs: Some(rhs),
            slack: Some((rhs - lhs) / rhs),
            p_range: p_range.into(),
            applicable: true,
            pass: lhs <= rhs * (1.0 + tolerance),
            tolerance,
            note: None,
        }
    }

    fn inapplicable(name: &str, lhs_name: &str, rhs_name: &str, p_range: &str, tolerance: f64, reason: String) -> Self {
        Self {
            name: name.into(),
            lhs_name: lhs_name.into(),
            rhs_name: rhs_name.into(),
            lhs: None,
            rhs: None,
            slack: None,
            p_range: p_range.into(),
            applicable: false,
            pass: false,
            tolerance,
            note: Some(reason),
        }
    }
}

/// Curvature sandwich of the capacity between the two bounds built from
/// `α ≤ κ_i ≤ β`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichRecord {
    pub alpha: f64,
    pub beta: f64,
    pub lower: f64,
    pub upper: f64,
    /// `ℋ^{n-1}(∂A)/σ_{n-1}`.
    pub surface_value: f64,
    pub lower_pass: bool,
    pub upper_pass: bool,
    pub tolerance: f64,
    /// Set for `p < 2`, where the bound is used beyond its proved range.
    pub extrapolated: bool,
}

impl SandwichRecord {
    pub fn pass(&self) -> bool {
        self.lower_pass && self.upper_pass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusReport {
    pub dim: usize,
    pub p: f64,
    pub volume_radius: f64,
    pub surface_radius: f64,
    pub semidiameter: f64,
    pub mean_radius: f64,
    pub capacity_radius: f64,
    pub imc_radius: Option<f64>,
    pub gehring_radius: Option<f64>,
    pub capacity: CapacityResult,
    pub inequalities: Vec<InequalityRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sandwich: Option<SandwichRecord>,
}

impl RadiusReport {
    pub fn applicable(&self) -> impl Iterator<Item = &InequalityRecord> {
        self.inequalities.iter().filter(|r| r.applicable)
    }

    /// Every applicable inequality holds within its tolerance.
    pub fn all_pass(&self) -> bool {
        self.applicable().all(|r| r.pass) && self.sandwich.as_ref().is_none_or(|s| s.pass())
    }

    pub fn record(&self, name: &str) -> Option<&InequalityRecord> {
        self.inequalities.iter().find(|r| r.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeOptions {
    pub grid: GridOptions,
    pub tolerance: f64,
    /// Per-inequality tolerance overrides, by record name.
    pub overrides: BTreeMap<String, f64>,
}

impl Default for TreeOptions {
    fn default() -> Self {
        Self {
            grid: GridOptions::default(),
            tolerance: DEFAULT_TOLERANCE,
            overrides: BTreeMap::new(),
        }
    }
}

impl TreeOptions {
    fn tol(&self, name: &str) -> f64 {
        self.overrides.get(name).copied().unwrap_or(self.tolerance)
    }
}

/// `((1/σ_{n-1}) ∫ H^{p-1})^{1/(n-p)}`, defined for smooth bodies and `p ∈ [2, n)`.
pub fn imc_radius(body: &Body, p: f64) -> Result<f64> {
    let n = body.dim();
    check_exponent(n, p)?;
    if p < 2.0 {
        return Err(Error::Parameter(format!(
            "integral mean curvature radius needs p in [2,n), got {p}"
        )));
    }
    let integral = body.mean_curvature_power_integral(p - 1.0)?;
    Ok((integral / unit_sphere_area(n)).powf(1.0 / (n as f64 - p)))
}

/// Computes every radius and checks the inequality tree at exponent `p`.
pub fn verify_tree(body: &Body, p: f64, opts: &TreeOptions) -> Result<RadiusReport> {
    let cap = capacity(body, p, &opts.grid)?;
    tree_with_capacity(body, p, cap, opts)
}

/// Same as [`verify_tree`] with a supplied capacity.
pub fn tree_with_capacity(body: &Body, p: f64, cap: CapacityResult, opts: &TreeOptions) -> Result<RadiusReport> {
    let n = body.dim();
    check_exponent(n, p)?;
    let nf = n as f64;
    let volume_radius = body.volume_radius();
    let surface_radius = body.surface_radius();
    let semidiameter = body.diameter() / 2.0;
    let mean_radius = body.mean_width() / 2.0;
    let capacity_r = capacity_radius(n, p, cap.value())?;
    let smooth = body.is_smooth();
    let imc = if smooth && p >= 2.0 {
        Some(imc_radius(body, p)?)
    } else {
        None
    };
    let gehring = if smooth {
        Some(capacity_radius(n, p, gehring_upper_bound(body, p)?)?)
    } else {
        None
    };

    let mut recs = Vec::new();
    let mut check = |name: &str, l: &str, r: &str, lhs: f64, rhs: f64, range: &str| {
        recs.push(InequalityRecord::check(name, l, r, lhs, rhs, range, opts.tol(name)));
    };
    let all = "(1,n)";
    check("mazya", "volume_radius", "capacity_radius", volume_radius, capacity_r, all);
    check("federer", "volume_radius", "surface_radius", volume_radius, surface_radius, all);
    check("semidiameter_capacity", "capacity_radius", "semidiameter", capacity_r, semidiameter, all);
    check("kubota", "surface_radius", "semidiameter", surface_radius, semidiameter, all);
    check("chakerian", "surface_radius", "mean_radius", surface_radius, mean_radius, all);
    if (p - (nf - 1.0)).abs() < 1e-12 {
        check("mean_radius_capacity", "capacity_radius", "mean_radius", capacity_r, mean_radius, "p = n-1");
    } else {
        recs.push(InequalityRecord::inapplicable(
            "mean_radius_capacity",
            "capacity_radius",
            "mean_radius",
            "p = n-1",
            opts.tol("mean_radius_capacity"),
            format!("needs p = {}", n - 1),
        ));
    }
    for (name, lhs_name, lhs) in [
        ("imc_capacity", "capacity_radius", capacity_r),
        ("imc_surface", "surface_radius", surface_radius),
    ] {
        match imc {
            Some(r) => recs.push(InequalityRecord::check(name, lhs_name, "imc_radius", lhs, r, "[2,n)", opts.tol(name))),
            None => recs.push(InequalityRecord::inapplicable(
                name,
                lhs_name,
                "imc_radius",
                "[2,n)",
                opts.tol(name),
                if smooth {
                    format!("needs p in [2,{n})")
                } else {
                    "needs a C² boundary".into()
                },
            )),
        }
    }
    match gehring {
        Some(g) => recs.push(InequalityRecord::check(
            "gehring",
            "capacity_radius",
            "gehring_radius",
            capacity_r,
            g,
            all,
            opts.tol("gehring"),
        )),
        None => recs.push(InequalityRecord::inapplicable(
            "gehring",
            "capacity_radius",
            "gehring_radius",
            all,
            opts.tol("gehring"),
            "needs a C² boundary".into(),
        )),
    }
    if smooth {
        // σ_{n-1} ≤ ∫ H^{n-1}, written as radii.
        let w = body.mean_curvature_power_integral(nf - 1.0)?;
        recs.push(InequalityRecord::check(
            "willmore",
            "unit_sphere_area",
            "total_mean_curvature_power",
            unit_sphere_area(n),
            w,
            "any",
            opts.tol("willmore"),
        ));
    } else {
        recs.push(InequalityRecord::inapplicable(
            "willmore",
            "unit_sphere_area",
            "total_mean_curvature_power",
            "any",
            opts.tol("willmore"),
            "needs a C² boundary".into(),
        ));
    }

    Ok(RadiusReport {
        dim: n,
        p,
        volume_radius,
        surface_radius,
        semidiameter,
        mean_radius,
        capacity_radius: capacity_r,
        imc_radius: imc,
        gehring_radius: gehring,
        capacity: cap,
        inequalities: recs,
        sandwich: None,
    })
}

/// Extreme principal curvatures over the boundary quadrature.
pub fn curvature_range(body: &Body) -> Result<(f64, f64)> {
    let q = body.curvature_quadrature()?;
    let ks = q.principal_curvatures.expect("smooth quadrature");
    let lo = ks.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let hi = ks.iter().flatten().copied().fold(0.0, f64::max);
    Ok((lo, hi))
}

/// Checks `((p-1)/((n-p)β))^{p-1} pcap/σ ≤ ℋ^{n-1}(∂A)/σ ≤ ((p-1)/((n-p)α))^{p-1} pcap/σ`
/// after verifying `α ≤ κ_i ≤ β` on the curvature quadrature.
pub fn sandwich_check(body: &Body, p: f64, alpha: f64, beta: f64, pcap: f64, tolerance: f64) -> Result<SandwichRecord> {
    let n = body.dim();
    check_exponent(n, p)?;
    if !(alpha > 0.0 && beta >= alpha) {
        return Err(Error::input("curvature bounds need 0 < α ≤ β"));
    }
    let q = body.curvature_quadrature()?;
    let ks = q.principal_curvatures.as_ref().expect("smooth quadrature");
    // Curvatures come from a differentiated support function.
    let slack = 1e-6;
    for (i, k) in ks.iter().enumerate() {
        for &kappa in k {
            if kappa < alpha * (1.0 - slack) || kappa > beta * (1.0 + slack) {
                let x = q.points[i];
                return Err(Error::Precondition(format!(
                    "principal curvature {kappa} outside [{alpha}, {beta}] at quadrature point {i} ({:.6}, {:.6}, {:.6})",
                    x[0], x[1], x[2]
                )));
            }
        }
    }
    let sigma = unit_sphere_area(n);
    let c = (p - 1.0) / (n as f64 - p);
    let lower = (c / beta).powf(p - 1.0) * pcap / sigma;
    let upper = (c / alpha).powf(p - 1.0) * pcap / sigma;
    let surface_value = body.surface_area() / sigma;
    Ok(SandwichRecord {
        alpha,
        beta,
        lower,
        upper,
        surface_value,
        lower_pass: lower <= surface_value * (1.0 + tolerance),
        upper_pass: surface_value <= upper * (1.0 + tolerance),
        tolerance,
        extrapolated: p < 2.0,
    })
}
