//! Incremental interval type-2 fuzzy PD controllers.
//!
//! Each controller scales the error and its increment into `[-1, 1]`, runs a
//! 3x3 rule base over Negative/Zero/Positive triangular IT2 sets, reduces with
//! the Wu-Mendel bounds and integrates the result into the output:
//! `u(k) = clamp(u(k-1) + G_U * U(E, dE))`.

use serde::{Deserialize, Serialize};

use crate::error::{FelmError, Result};
use crate::fuzzy::{It2Triangular, Triangular};
use crate::reduce::{uncertainty_bounds, ReductionInput};

/// Antisymmetric PD table: `(i + j - 2) / 2` for N=0, Z=1, P=2.
pub const DEFAULT_RULE_TABLE: [[f64; 3]; 3] = [[-1.0, -0.5, 0.0], [-0.5, 0.0, 0.5], [0.0, 0.5, 1.0]];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FpdConfig {
    pub gain_error: f64,
    pub gain_delta: f64,
    pub gain_output: f64,
    pub u_min: f64,
    pub u_max: f64,
    /// Half-width of the FOU around each triangle's feet, in normalised units.
    pub fou_spread: f64,
    /// `rule_table[e][de]` with index 0 = Negative, 1 = Zero, 2 = Positive.
    pub rule_table: [[f64; 3]; 3],
}

impl Default for FpdConfig {
    fn default() -> Self {
        Self {
            gain_error: 1.0,
            gain_delta: 0.5,
            gain_output: 0.5,
            u_min: -1.0,
            u_max: 1.0,
            fou_spread: 0.2,
            rule_table: DEFAULT_RULE_TABLE,
        }
    }
}

impl FpdConfig {
    pub fn heading() -> Self {
        Self { gain_error: 1.0 / 45.0, gain_delta: 0.5, gain_output: 0.5, ..Self::default() }
    }

    pub fn depth() -> Self {
        Self { gain_error: 1.0 / 3.5, gain_delta: 20.0, gain_output: 0.5, ..Self::default() }
    }

    pub fn edge() -> Self {
        Self { gain_error: 1.0, gain_delta: 20.0, gain_output: 0.5, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let gains = [self.gain_error, self.gain_delta, self.gain_output, self.u_min, self.u_max, self.fou_spread];
        if gains.iter().any(|g| !g.is_finite()) || self.rule_table.iter().flatten().any(|v| !v.is_finite()) {
            return Err(FelmError::NonFinite("controller configuration"));
        }
        if self.u_min >= self.u_max {
            return Err(FelmError::InvalidConfig(format!("u_min {} must be below u_max {}", self.u_min, self.u_max)));
        }
        // below 0.5 some lower membership is positive everywhere on [-1, 1],
        // so the Wu-Mendel bounds are always defined
        if !(0.0..0.5).contains(&self.fou_spread) {
            return Err(FelmError::InvalidConfig(format!("FOU spread {} must lie in [0, 0.5)", self.fou_spread)));
        }
        Ok(())
    }

    fn sets(&self) -> Result<[It2Triangular; 3]> {
        let s = self.fou_spread;
        Ok([
            It2Triangular::new(-2.0, -1.0, 0.0, s)?,
            It2Triangular::new(-1.0, 0.0, 1.0, s)?,
            It2Triangular::new(0.0, 1.0, 2.0, s)?,
        ])
    }

    /// Normalised rule-base output `U(E, dE)` for inputs already in `[-1, 1]`.
    pub fn fuzzy_output(&self, e: f64, de: f64) -> Result<f64> {
        let sets = self.sets()?;
        let mu_e = sets.map(|s| s.eval(e));
        let mu_de = sets.map(|s| s.eval(de));
        let mut firings = [crate::fuzzy::FiringInterval::crisp(0.0); 9];
        let mut consequents = [0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                let r = 3 * i + j;
                firings[r] = crate::fuzzy::FiringInterval {
                    lower: mu_e[i].lower * mu_de[j].lower,
                    upper: mu_e[i].upper * mu_de[j].upper,
                };
                consequents[r] = self.rule_table[i][j];
            }
        }
        let input = ReductionInput::new(&firings, &consequents)?;
        let bounds = uncertainty_bounds(&input)?;
        #[cfg(debug_assertions)]
        {
            let km = crate::reduce::km_reduce(&input)?;
            let tol = 1e-9;
            debug_assert!(bounds.outer_left <= km.y_left + tol && km.y_left <= bounds.inner_left + tol);
            debug_assert!(bounds.inner_right <= km.y_right + tol && km.y_right <= bounds.outer_right + tol);
        }
        Ok(bounds.output())
    }

    /// Same rule base with type-1 triangles, reduced as a weighted average.
    pub fn type1_output(&self, e: f64, de: f64) -> Result<f64> {
        let tri = [
            Triangular::new(-2.0, -1.0, 0.0)?,
            Triangular::new(-1.0, 0.0, 1.0)?,
            Triangular::new(0.0, 1.0, 2.0)?,
        ];
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let f = tri[i].eval(e) * tri[j].eval(de);
                num += f * self.rule_table[i][j];
                den += f;
            }
        }
        Ok(num / den)
    }
}

/// Memory of one controller instance between samples.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FpdState {
    pub prev_error: f64,
    pub prev_output: f64,
    pub k: u64,
}

impl FpdState {
    pub fn reset(&mut self) {
        *self = Self::default();
    }
}

/// One sample of the incremental controller driven by a precomputed error.
pub fn controller_step_error(cfg: &FpdConfig, state: &FpdState, error: f64) -> Result<(f64, FpdState)> {
    if !error.is_finite() {
        return Err(FelmError::NonFinite("controller error"));
    }
    let delta = error - state.prev_error;
    let e_norm = (cfg.gain_error * error).clamp(-1.0, 1.0);
    let de_norm = (cfg.gain_delta * delta).clamp(-1.0, 1.0);
    let u_rule = cfg.fuzzy_output(e_norm, de_norm)?;
    let u = (state.prev_output + cfg.gain_output * u_rule).clamp(cfg.u_min, cfg.u_max);
    Ok((u, FpdState { prev_error: error, prev_output: u, k: state.k + 1 }))
}

/// One sample with `e = y_ref - y_f`.
pub fn controller_step(cfg: &FpdConfig, state: &FpdState, y_ref: f64, y_f: f64) -> Result<(f64, FpdState)> {
    if !y_ref.is_finite() || !y_f.is_finite() {
        return Err(FelmError::NonFinite("controller measurement"));
    }
    controller_step_error(cfg, state, y_ref - y_f)
}

/// Wraps degrees into `[0, 360)`.
pub fn wrap_degrees(angle: f64) -> f64 {
    let a = angle.rem_euclid(360.0);
    if a >= 360.0 {
        0.0
    } else {
        a
    }
}

/// Shortest signed arc from `current` to `target`, in `(-180, 180]`.
pub fn angle_error(target: f64, current: f64) -> f64 {
    let d = wrap_degrees(target - current);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

/// Target heading from the compass heading plus the sonar bearing correction.
pub fn heading_reference(heading: f64, bearing: f64) -> f64 {
    wrap_degrees(heading + bearing)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BehaviorKind {
    Heading,
    Depth,
    Edge,
}

/// Latest sensor readings; `None` marks a missing or stale value.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SensorSnapshot {
    pub heading: Option<f64>,
    pub depth: Option<f64>,
    pub edge_range: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BehaviorTargets {
    pub heading: f64,
    pub depth: f64,
    pub edge_distance: f64,
}

pub fn behavior_error(kind: BehaviorKind, sensors: &SensorSnapshot, targets: &BehaviorTargets) -> Result<f64> {
    let read = |v: Option<f64>, name: &'static str| match v {
        Some(x) if x.is_finite() => Ok(x),
        _ => Err(FelmError::MissingSensor(name)),
    };
    match kind {
        BehaviorKind::Heading => Ok(angle_error(targets.heading, read(sensors.heading, "compass")?)),
        BehaviorKind::Depth => Ok(targets.depth - read(sensors.depth, "depth")?),
        BehaviorKind::Edge => Ok(targets.edge_distance - read(sensors.edge_range, "sonar")?),
    }
}
