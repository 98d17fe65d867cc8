//! Synthetic labelled scans sampled along wall-following tracks.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tank::{simulate_sonar, BeamSide, TankGeometry, Wall, BEAM_OFFSETS};
use crate::control::wrap_degrees;
use crate::data::Dataset;
use crate::error::{FelmError, Result};
use crate::rng::{stream, streams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    pub wall: usize,
    pub corner: usize,
    pub noise: f64,
    pub seed: u64,
    pub tank: TankGeometry,
    pub offsets: [f64; 5],
    /// Range of distances to the followed wall.
    pub standoff: (f64, f64),
    /// Clearance kept from every wall when placing the vehicle.
    pub clearance: f64,
    /// Standard deviation (deg) of the heading error on cruising poses.
    pub heading_jitter: f64,
    /// Share of poses caught mid-turn away from the wall.
    pub turning_share: f64,
    /// Share of poses placed anywhere with any heading.
    pub free_share: f64,
    pub max_draws: usize,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            wall: 400,
            corner: 388,
            noise: 0.02,
            seed: 0,
            tank: TankGeometry::default(),
            offsets: BEAM_OFFSETS,
            standoff: (0.3, 1.7),
            clearance: 0.2,
            heading_jitter: 8.0,
            turning_share: 0.3,
            free_share: 0.0,
            max_draws: 1_000_000,
        }
    }
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<()> {
        self.tank.validate()?;
        if self.wall + self.corner < 2 {
            return Err(FelmError::InvalidConfig("need at least 2 samples".into()));
        }
        let v = [self.noise, self.standoff.0, self.standoff.1, self.clearance, self.heading_jitter, self.turning_share, self.free_share];
        if v.iter().any(|x| !x.is_finite()) {
            return Err(FelmError::NonFinite("dataset configuration"));
        }
        if self.noise < 0.0 || self.heading_jitter < 0.0 {
            return Err(FelmError::InvalidConfig("noise levels must be non-negative".into()));
        }
        let half = 0.5 * self.tank.width.min(self.tank.length);
        if !(self.clearance < self.standoff.0 && self.standoff.0 <= self.standoff.1 && self.standoff.1 < 2.0 * half - self.clearance) {
            return Err(FelmError::InvalidConfig(format!("standoff range {:?} does not fit the tank", self.standoff)));
        }
        if self.turning_share < 0.0 || self.free_share < 0.0 || self.turning_share + self.free_share > 1.0 {
            return Err(FelmError::InvalidConfig("pose mixture shares must be non-negative and sum to at most 1".into()));
        }
        Ok(())
    }
}

/// A sampled pose: position, heading and the side the fan looks out of.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub side: BeamSide,
}

pub fn sample_pose<R: Rng>(cfg: &DatasetConfig, rng: &mut R) -> Pose {
    let tank = &cfg.tank;
    let c = cfg.clearance;
    let side = if rng.gen_bool(0.5) { BeamSide::Port } else { BeamSide::Starboard };
    let kind: f64 = rng.gen();
    if kind < cfg.free_share {
        return Pose {
            x: rng.gen_range(c..tank.width - c),
            y: rng.gen_range(c..tank.length - c),
            heading: rng.gen_range(0.0..360.0),
            side,
        };
    }
    let wall = Wall::ALL[rng.gen_range(0..4)];
    let standoff = rng.gen_range(cfg.standoff.0..=cfg.standoff.1);
    let heading_error = if kind < cfg.free_share + cfg.turning_share {
        // turning away from the followed wall
        -side.sign() * rng.gen_range(0.0..100.0)
    } else {
        let g: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng);
        g * cfg.heading_jitter
    };
    let heading = wrap_degrees(side.following_heading(wall) + heading_error);
    let (x, y) = match wall {
        Wall::South => (rng.gen_range(c..tank.width - c), standoff),
        Wall::North => (rng.gen_range(c..tank.width - c), tank.length - standoff),
        Wall::West => (standoff, rng.gen_range(c..tank.length - c)),
        Wall::East => (tank.width - standoff, rng.gen_range(c..tank.length - c)),
    };
    Pose { x, y, heading, side }
}

/// Rejection-samples poses until both class counts are met exactly.
pub fn generate_dataset(cfg: &DatasetConfig) -> Result<Dataset> {
    cfg.validate()?;
    let mut poses = stream(cfg.seed, streams::POSES);
    let mut noise = stream(cfg.seed, streams::NOISE);
    let target = [cfg.wall, cfg.corner];
    let mut have = [0usize; 2];
    let mut features = Vec::with_capacity(cfg.wall + cfg.corner);
    let mut labels = Vec::with_capacity(cfg.wall + cfg.corner);
    for _ in 0..cfg.max_draws {
        if have == target {
            break;
        }
        let pose = sample_pose(cfg, &mut poses);
        let scan = simulate_sonar(&cfg.tank, pose.x, pose.y, pose.heading, pose.side, &cfg.offsets, cfg.noise, 0.0, &mut noise)?;
        let class = usize::from(scan.label.label());
        if have[class] < target[class] {
            have[class] += 1;
            features.push(scan.ranges.to_vec());
            labels.push(scan.label.label());
        }
    }
    if have != target {
        return Err(FelmError::InvalidConfig(format!(
            "could not reach {} wall / {} corner samples within {} draws",
            cfg.wall, cfg.corner, cfg.max_draws
        )));
    }
    Dataset::sonar(features, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::tank::contour_label;

    #[test]
    fn exact_counts_and_determinism() {
        let cfg = DatasetConfig { wall: 40, corner: 30, ..DatasetConfig::default() };
        let a = generate_dataset(&cfg).unwrap();
        assert_eq!(a.class_counts(), [40, 30]);
        assert_eq!(a.inputs(), 5);
        assert_eq!(a, generate_dataset(&cfg).unwrap());
        let b = generate_dataset(&DatasetConfig { seed: 1, ..cfg }).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn unreachable_counts_fail() {
        let cfg = DatasetConfig { wall: 10, corner: 10, max_draws: 5, ..DatasetConfig::default() };
        assert!(generate_dataset(&cfg).is_err());
    }

    #[test]
    fn labels_agree_with_sonar_rule() {
        let cfg = DatasetConfig { noise: 0.0, ..DatasetConfig::default() };
        let mut rng = stream(9, "poses");
        for _ in 0..500 {
            let p = sample_pose(&cfg, &mut rng);
            let scan = simulate_sonar(&cfg.tank, p.x, p.y, p.heading, p.side, &cfg.offsets, 0.0, 0.0, &mut rng).unwrap();
            assert_eq!(scan.label, contour_label(&cfg.tank, p.x, p.y, p.heading, p.side, &cfg.offsets).unwrap());
            assert!(p.x >= cfg.clearance && p.x <= cfg.tank.width - cfg.clearance);
        }
    }
}
