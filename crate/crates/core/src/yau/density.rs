use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{integrate, unit_sphere_area};

/// Positive mass density `h` on `ℝⁿ`, tagged by `kind` in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MassDensity {
    /// `a exp(-|x - c|²/(2s²))`.
    GaussianBump {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: Vec<f64>,
    },
    /// `a (1 + |x - c|²/r_c²)^{-q/2}`, integrable for `q > n`.
    RadialPower {
        amplitude: f64,
        decay: f64,
        #[serde(default = "unit")]
        core: f64,
        #[serde(default)]
        center: Vec<f64>,
    },
    /// Radial table, linear in between; past the last radius the value
    /// decays like `(r_last/r)^4`.
    Tabulated {
        radii: Vec<f64>,
        values: Vec<f64>,
        #[serde(default)]
        center: Vec<f64>,
    },
    /// `h ≡ value`; not integrable, used for pointwise Euler–Lagrange checks.
    Constant { value: f64 },
}

fn unit() -> f64 {
    1.0
}

const TABLE_TAIL: f64 = 4.0;

impl MassDensity {
    pub fn gaussian(amplitude: f64, width: f64, center: &[f64]) -> Result<Self> {
        let h = MassDensity::GaussianBump {
            amplitude,
            width,
            center: center.to_vec(),
        };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        let center_ok = |c: &[f64]| c.len() <= 3 && c.iter().all(|v| v.is_finite());
        match self {
            MassDensity::GaussianBump {
                amplitude,
                width,
                center,
            } => {
                if !(*amplitude > 0.0 && amplitude.is_finite()) || !(*width > 0.0 && width.is_finite()) {
                    return Err(Error::input("gaussian bump needs positive amplitude and width"));
                }
                if !center_ok(center) {
                    return Err(Error::input("density centre must have at most 3 finite coordinates"));
                }
            }
            MassDensity::RadialPower {
                amplitude,
                decay,
                core,
                center,
            } => {
                if !(*amplitude > 0.0) || !(*core > 0.0) || !decay.is_finite() {
                    return Err(Error::input("radial power needs positive amplitude and core"));
                }
                if !(*decay > 2.0) {
                    return Err(Error::input(format!(
                        "radial power decay {decay} must exceed the dimension"
                    )));
                }
                if !center_ok(center) {
                    return Err(Error::input("density centre must have at most 3 finite coordinates"));
                }
            }
            MassDensity::Tabulated {
                radii,
                values,
                center,
            } => {
                if radii.len() < 2 || radii.len() != values.len() {
                    return Err(Error::input("tabulated density needs at least 2 matching samples"));
                }
                if radii[0] != 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::input("tabulated radii must start at 0 and increase"));
                }
                if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                    return Err(Error::input("tabulated density values must be positive"));
                }
                if !center_ok(center) {
                    return Err(Error::input("density centre must have at most 3 finite coordinates"));
                }
            }
            MassDensity::Constant { value } => {
                if !(*value > 0.0 && value.is_finite()) {
                    return Err(Error::input("constant density must be positive"));
                }
            }
        }
        Ok(())
    }

    /// [`MassDensity::validate`] plus integrability in `ℝⁿ`.
    pub fn validate_for(&self, n: usize) -> Result<()> {
        self.validate()?;
        if let MassDensity::RadialPower { decay, .. } = self {
            if !(*decay > n as f64) {
                return Err(Error::input(format!(
                    "radial power decay {decay} must exceed the dimension {n}"
                )));
            }
        }
        if self.center_slice().len() > n {
            return Err(Error::input(format!("density centre has more than {n} coordinates")));
        }
        Ok(())
    }

    fn center_slice(&self) -> &[f64] {
        match self {
            MassDensity::GaussianBump { center, .. }
            | MassDensity::RadialPower { center, .. }
            | MassDensity::Tabulated { center, .. } => center,
            MassDensity::Constant { .. } => &[],
        }
    }

    /// Centre padded with zeros to `n` coordinates.
    pub fn center(&self, n: usize) -> Vec<f64> {
        let c = self.center_slice();
        (0..n).map(|i| c.get(i).copied().unwrap_or(0.0)).collect()
    }

    /// Profile as a function of the distance to the centre.
    pub fn radial(&self, r: f64) -> f64 {
        match self {
            MassDensity::GaussianBump { amplitude, width, .. } => {
                amplitude * (-0.5 * (r / width).powi(2)).exp()
            }
            MassDensity::RadialPower {
                amplitude,
                decay,
                core,
                ..
            } => amplitude * (1.0 + (r / core).powi(2)).powf(-0.5 * decay),
            MassDensity::Tabulated { radii, values, .. } => {
                let last = radii.len() - 1;
                if r >= radii[last] {
                    return values[last] * (radii[last] / r).powf(TABLE_TAIL);
                }
                let k = radii.partition_point(|v| *v <= r).max(1) - 1;
                let t = (r - radii[k]) / (radii[k + 1] - radii[k]);
                values[k] + t * (values[k + 1] - values[k])
            }
            MassDensity::Constant { value } => *value,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let c = self.center_slice();
        let r2: f64 = x
            .iter()
            .enumerate()
            .map(|(i, v)| (v - c.get(i).copied().unwrap_or(0.0)).powi(2))
            .sum();
        self.radial(r2.sqrt())
    }

    /// `‖h‖_{L¹(ℝⁿ)}`; infinite for the constant preset.
    pub fn l1_norm(&self, n: usize) -> f64 {
        let sigma = unit_sphere_area(n);
        let nf = n as f64;
        match self {
            MassDensity::GaussianBump { amplitude, width, .. } => {
                amplitude * (2.0 * std::f64::consts::PI * width * width).powf(0.5 * nf)
            }
            MassDensity::RadialPower { core, .. } => {
                // ρ = core·x/(1-x) maps (0,1) onto (0,∞).
                let head = integrate(
                    |x: f64| {
                        if x >= 1.0 {
                            return 0.0;
                        }
                        let r = core * x / (1.0 - x);
                        let jac = core / (1.0 - x).powi(2);
                        self.radial(r) * r.powf(nf - 1.0) * jac
                    },
                    0.0,
                    1.0,
                    0.0,
                    1e-11,
                );
                sigma * head
            }
            MassDensity::Tabulated { radii, values, .. } => {
                let last = *radii.last().expect("validated");
                let body = integrate(|r| self.radial(r) * r.powf(nf - 1.0), 0.0, last, 0.0, 1e-11);
                let tail = values[values.len() - 1] * last.powf(nf) / (TABLE_TAIL - nf);
                sigma * (body + tail)
            }
            MassDensity::Constant { .. } => f64::INFINITY,
        }
    }

    /// Length over which the density varies.
    pub fn length_scale(&self) -> f64 {
        match self {
            MassDensity::GaussianBump { width, .. } => *width,
            MassDensity::RadialPower { core, .. } => *core,
            MassDensity::Tabulated { radii, .. } => radii[radii.len() - 1] / 2.0,
            MassDensity::Constant { .. } => 1.0,
        }
    }

    /// `h(· - v)`.
    pub fn translated(&self, v: &[f64]) -> Self {
        let shift = |c: &Vec<f64>| -> Vec<f64> {
            let n = c.len().max(v.len());
            (0..n)
                .map(|i| c.get(i).copied().unwrap_or(0.0) + v.get(i).copied().unwrap_or(0.0))
                .collect()
        };
        let mut out = self.clone();
        match &mut out {
            MassDensity::GaussianBump { center, .. }
            | MassDensity::RadialPower { center, .. }
            | MassDensity::Tabulated { center, .. } => *center = shift(center),
            MassDensity::Constant { .. } => {}
        }
        out
    }

    /// `λ h`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            MassDensity::GaussianBump { amplitude, .. } | MassDensity::RadialPower { amplitude, .. } => {
                *amplitude *= lambda
            }
            MassDensity::Tabulated { values, .. } => values.iter_mut().for_each(|v| *v *= lambda),
            MassDensity::Constant { value } => *value *= lambda,
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn l1_norms() {
        let g = MassDensity::gaussian(3.0, 0.5, &[1.0, 2.0]).unwrap();
        assert_relative_eq!(g.l1_norm(2), 3.0 * 2.0 * PI * 0.25, max_relative = 1e-14);
        // ∫ (1+r²)^{-2} over the plane is π.
        let r = MassDensity::RadialPower {
            amplitude: 1.0,
            decay: 4.0,
            core: 1.0,
            center: vec![],
        };
        assert_relative_eq!(r.l1_norm(2), PI, max_relative = 1e-9);
        let t = MassDensity::Tabulated {
            radii: vec![0.0, 1.0],
            values: vec![1.0, 1.0],
            center: vec![],
        };
        // π + 2π ∫_1^∞ r^{-3} dr = 2π.
        assert_relative_eq!(t.l1_norm(2), 2.0 * PI, max_relative = 1e-9);
    }

    #[test]
    fn translation_moves_the_centre() {
        let g = MassDensity::gaussian(1.0, 1.0, &[]).unwrap();
        let t = g.translated(&[1.0, -2.0]);
        assert_relative_eq!(t.eval(&[1.3, -1.5]), g.eval(&[0.3, 0.5]), max_relative = 1e-15);
    }

    #[test]
    fn rejects_bad_presets() {
        assert!(MassDensity::gaussian(-1.0, 1.0, &[]).is_err());
        let slow = MassDensity::RadialPower {
            amplitude: 1.0,
            decay: 2.5,
            core: 1.0,
            center: vec![],
        };
        assert!(slow.validate_for(2).is_ok());
        assert!(slow.validate_for(3).is_err());
    }
}
