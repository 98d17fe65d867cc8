//! Closed-loop mission: sonar, classification, coordination, control.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::hns::{behavior_table, BehaviorSet, HnsThresholds, Predicates};
use super::tank::{front_distance, simulate_sonar, BeamSide, TankGeometry, Wall, BEAM_OFFSETS};
use super::vehicle::{step_vehicle, Commands, VehicleLimits, VehicleState};
use crate::control::{angle_error, controller_step_error, heading_reference, wrap_degrees, FpdConfig, FpdState};
use crate::error::{FelmError, Result};
use crate::rng::{stream, streams};
use crate::train::{ConfusionMatrix, Model};
use crate::tsk::{ClassScoreWindow, ContourClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Clockwise,
    Anticlockwise,
}

impl Direction {
    /// Clockwise travel keeps the walls to port.
    pub fn side(self) -> BeamSide {
        match self {
            Direction::Clockwise => BeamSide::Port,
            Direction::Anticlockwise => BeamSide::Starboard,
        }
    }

    pub fn next_wall(self, wall: Wall) -> Wall {
        match self {
            Direction::Clockwise => wall.clockwise_next(),
            Direction::Anticlockwise => wall.counterclockwise_next(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeTarget {
    pub wall: u8,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControllerSet {
    pub heading: FpdConfig,
    pub depth: FpdConfig,
    pub edge: FpdConfig,
}

impl Default for ControllerSet {
    fn default() -> Self {
        Self { heading: FpdConfig::heading(), depth: FpdConfig::depth(), edge: FpdConfig::edge() }
    }
}

impl ControllerSet {
    pub fn validate(&self) -> Result<()> {
        self.heading.validate()?;
        self.depth.validate()?;
        self.edge.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MissionConfig {
    /// Total circuits; circuit `k` runs at `depths[k % depths.len()]`.
    pub circuits: usize,
    pub depths: Vec<f64>,
    pub edge_distance: f64,
    pub edge_overrides: Vec<EdgeTarget>,
    pub direction: Direction,
    pub sonar_noise: f64,
    pub compass_noise: f64,
    pub depth_noise: f64,
    pub dt: f64,
    pub seed: u64,
    pub tank: TankGeometry,
    pub vehicle: VehicleLimits,
    pub thresholds: HnsThresholds,
    pub controllers: ControllerSet,
    pub offsets: [f64; 5],
    pub cruise_surge: f64,
    /// Heading offset (deg) commanded by a saturated edge controller.
    pub max_edge_offset: f64,
    pub smoothing: usize,
    /// Edge error (m) below which a new wall counts as acquired.
    pub capture_tolerance: f64,
    /// Shortfall (m) in cross-wall reach that marks a beam as landing ahead.
    pub split_margin: f64,
    /// Weight of the newest sample in the low-pass filter on the edge range; 1 disables it.
    pub edge_filter: f64,
    /// Steps inside the depth tolerance before a depth change completes.
    pub settle_steps: usize,
    /// Start standoff spread (m) around the start wall's target.
    pub start_jitter: f64,
    /// Start heading spread (deg) around the wall direction.
    pub start_heading_jitter: f64,
    pub max_steps: usize,
}

impl Default for MissionConfig {
    fn default() -> Self {
        Self {
            circuits: 2,
            depths: vec![0.0, 2.0],
            edge_distance: 0.65,
            edge_overrides: vec![EdgeTarget { wall: 4, distance: 1.5 }],
            direction: Direction::Clockwise,
            sonar_noise: 0.02,
            compass_noise: 0.5,
            depth_noise: 0.01,
            dt: 0.1,
            seed: 0,
            tank: TankGeometry::default(),
            vehicle: VehicleLimits::default(),
            thresholds: HnsThresholds::default(),
            controllers: ControllerSet::default(),
            offsets: BEAM_OFFSETS,
            cruise_surge: 0.6,
            max_edge_offset: 30.0,
            smoothing: 4,
            capture_tolerance: 0.1,
            split_margin: 0.1,
            edge_filter: 0.5,
            settle_steps: 10,
            start_jitter: 0.1,
            start_heading_jitter: 10.0,
            max_steps: 60_000,
        }
    }
}

impl MissionConfig {
    pub fn validate(&self) -> Result<()> {
        self.tank.validate()?;
        self.vehicle.validate(&self.tank)?;
        self.controllers.validate()?;
        let reals = [
            self.edge_distance,
            self.sonar_noise,
            self.compass_noise,
            self.depth_noise,
            self.dt,
            self.cruise_surge,
            self.max_edge_offset,
            self.capture_tolerance,
            self.split_margin,
            self.edge_filter,
            self.start_jitter,
            self.start_heading_jitter,
            self.thresholds.heading,
            self.thresholds.depth,
            self.thresholds.class_threshold,
        ];
        if reals.iter().chain(&self.depths).chain(&self.offsets).any(|v| !v.is_finite()) {
            return Err(FelmError::NonFinite("mission configuration"));
        }
        let bad = |msg: String| Err(FelmError::InvalidConfig(msg));
        if self.circuits == 0 {
            return bad("circuits must be at least 1".into());
        }
        if !(self.edge_filter > 0.0 && self.edge_filter <= 1.0) {
            return bad(format!("edge filter weight {} must lie in (0, 1]", self.edge_filter));
        }
        if self.depths.is_empty() {
            return bad("at least one depth setpoint is required".into());
        }
        if let Some(d) = self.depths.iter().find(|d| !(0.0..=self.tank.depth).contains(*d)) {
            return bad(format!("depth setpoint {d} lies outside [0, {}]", self.tank.depth));
        }
        let half = 0.5 * self.tank.width.min(self.tank.length);
        if !(self.vehicle.radius < self.edge_distance && self.edge_distance < half) {
            return bad(format!("edge distance {} must lie in ({}, {half})", self.edge_distance, self.vehicle.radius));
        }
        for o in &self.edge_overrides {
            if Wall::from_id(o.wall).is_none() {
                return bad(format!("edge override names wall {}, expected 1-4", o.wall));
            }
            if !(o.distance.is_finite() && self.vehicle.radius < o.distance && o.distance < 2.0 * half - self.vehicle.radius) {
                return bad(format!("edge override {} for wall {} does not fit the tank", o.distance, o.wall));
            }
        }
        if self.sonar_noise < 0.0 || self.compass_noise < 0.0 || self.depth_noise < 0.0 {
            return bad("noise levels must be non-negative".into());
        }
        if self.dt <= 0.0 || self.max_steps == 0 || self.smoothing == 0 || self.thresholds.corner_steps == 0 {
            return bad("dt, max_steps, smoothing and corner_steps must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.cruise_surge) || self.max_edge_offset <= 0.0 || self.max_edge_offset > 90.0 {
            return bad("cruise_surge must lie in [0, 1] and max_edge_offset in (0, 90]".into());
        }
        if self.start_jitter < 0.0 || self.start_heading_jitter < 0.0 || self.start_heading_jitter >= 45.0 {
            return bad("start jitters must be non-negative, heading jitter below 45".into());
        }
        let closest = self.edge_overrides.iter().map(|o| o.distance).fold(self.edge_distance, f64::min);
        if closest - self.start_jitter < self.vehicle.radius {
            return bad(format!("start jitter {} can place the vehicle inside a wall", self.start_jitter));
        }
        Ok(())
    }

    pub fn edge_target(&self, wall: Wall) -> f64 {
        self.edge_overrides.iter().rev().find(|o| o.wall == wall.id()).map_or(self.edge_distance, |o| o.distance)
    }
}

/// Source of the per-scan corner score.
pub trait ContourClassifier {
    fn score(&self, ranges: &[f64; 5], truth: ContourClass) -> Result<f64>;
}

impl ContourClassifier for Model {
    fn score(&self, ranges: &[f64; 5], _truth: ContourClass) -> Result<f64> {
        Model::score(self, ranges)
    }
}

/// Oracle classifier that reads the ground-truth label.
#[derive(Debug, Clone, Copy, Default)]
pub struct GroundTruth;

impl ContourClassifier for GroundTruth {
    fn score(&self, _ranges: &[f64; 5], truth: ContourClass) -> Result<f64> {
        Ok(f64::from(truth.label()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Follow,
    /// Straight run to the next wall's standoff before turning.
    Approach,
    Turn,
    DepthChange,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Follow => "follow",
            Mode::Approach => "approach",
            Mode::Turn => "turn",
            Mode::DepthChange => "depth-change",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub state: VehicleState,
    pub ranges: [f64; 5],
    pub raw_score: f64,
    pub smoothed_score: f64,
    pub class: u8,
    pub truth: u8,
    pub behaviors: BehaviorSet,
    pub commands: Commands,
    pub wall: u8,
    pub mode: Mode,
    pub depth_ref: f64,
    /// Target minus true distance to the followed wall, while edge control runs.
    pub edge_error: Option<f64>,
    /// Edge control runs on a wall that has already been acquired.
    pub following: bool,
    pub collision: bool,
    /// Circuits completed so far.
    pub circuit: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitRecord {
    pub index: usize,
    pub depth: f64,
    pub completed_at: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionSummary {
    pub completed: bool,
    pub failure: Option<String>,
    pub circuits_required: usize,
    pub circuits_completed: usize,
    pub circuits: Vec<CircuitRecord>,
    pub collisions: usize,
    /// Mean |edge error| over steps that follow an acquired wall.
    pub mean_abs_edge_error: f64,
    /// Mean |edge error| over every step with edge control active.
    pub mean_abs_edge_error_all: f64,
    pub following_steps: usize,
    pub classification_accuracy: f64,
    pub confusion: ConfusionMatrix,
    pub steps: usize,
    pub sim_time: f64,
}

impl MissionSummary {
    /// Rebuilds every metric from the step records.
    pub fn from_records(records: &[StepRecord], circuits_required: usize, failure: Option<String>) -> Self {
        let mut circuits = Vec::new();
        let mut prev = 0;
        let mut prev_depth = records.first().map_or(0.0, |r| r.depth_ref);
        for r in records {
            if r.circuit > prev {
                circuits.push(CircuitRecord { index: r.circuit, depth: prev_depth, completed_at: r.state.t });
                prev = r.circuit;
            }
            prev_depth = r.depth_ref;
        }
        let mean = |it: &mut dyn Iterator<Item = f64>| {
            let (s, n) = it.fold((0.0, 0usize), |(s, n), v| (s + v.abs(), n + 1));
            (if n == 0 { 0.0 } else { s / n as f64 }, n)
        };
        let (following, following_steps) = mean(&mut records.iter().filter(|r| r.following).filter_map(|r| r.edge_error));
        let (all, _) = mean(&mut records.iter().filter_map(|r| r.edge_error));
        let mut confusion = ConfusionMatrix::default();
        for r in records {
            confusion.record(r.truth, r.class);
        }
        let circuits_completed = records.last().map_or(0, |r| r.circuit);
        Self {
            completed: failure.is_none() && circuits_completed >= circuits_required,
            failure,
            circuits_required,
            circuits_completed,
            circuits,
            collisions: records.iter().filter(|r| r.collision).count(),
            mean_abs_edge_error: following,
            mean_abs_edge_error_all: all,
            following_steps,
            classification_accuracy: confusion.accuracy(),
            confusion,
            steps: records.len(),
            sim_time: records.last().map_or(0.0, |r| r.state.t),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionLog {
    pub records: Vec<StepRecord>,
    pub summary: MissionSummary,
}

pub const LOG_HEADER: &str = "t,x,y,depth,heading,r180,r172,r164,r156,r148,raw_score,smoothed_score,class,ground_truth,behaviors,u_yaw,u_surge,u_heave,wall,mode,depth_ref,edge_error,following,collision,circuit";

impl MissionLog {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.records.len() * 256);
        out.push_str(LOG_HEADER);
        out.push('\n');
        for r in &self.records {
            let s = &r.state;
            let _ = write!(out, "{},{},{},{},{}", s.t, s.x, s.y, s.depth, s.heading);
            for v in r.ranges {
                let _ = write!(out, ",{v}");
            }
            let edge = r.edge_error.map(|e| e.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                ",{},{},{},{},{},{},{},{},{},{},{},{edge},{},{},{}",
                r.raw_score,
                r.smoothed_score,
                r.class,
                r.truth,
                r.behaviors.label(),
                r.commands.yaw,
                r.commands.surge,
                r.commands.heave,
                r.wall,
                r.mode.name(),
                r.depth_ref,
                u8::from(r.following),
                u8::from(r.collision),
                r.circuit
            );
        }
        out
    }
}

/// Random start on a random wall's track: near its standoff, away from the
/// corners, roughly parallel to it.
pub fn start_pose(cfg: &MissionConfig) -> VehicleState {
    let mut rng = stream(cfg.seed, streams::START);
    let wall = Wall::ALL[rng.gen_range(0..4)];
    let standoff = cfg.edge_target(wall) + rng.gen_range(-cfg.start_jitter..=cfg.start_jitter);
    let along = rng.gen_range(0.3..=0.7);
    let (x, y) = match wall {
        Wall::South => (along * cfg.tank.width, standoff),
        Wall::North => (along * cfg.tank.width, cfg.tank.length - standoff),
        Wall::West => (standoff, along * cfg.tank.length),
        Wall::East => (cfg.tank.width - standoff, along * cfg.tank.length),
    };
    let heading = cfg.direction.side().following_heading(wall) + rng.gen_range(-cfg.start_heading_jitter..=cfg.start_heading_jitter);
    VehicleState { x, y, depth: cfg.depths[0], heading: wrap_degrees(heading), ..VehicleState::default() }
}

fn gaussian<R: Rng>(rng: &mut R, sigma: f64) -> Result<f64> {
    if sigma == 0.0 {
        return Ok(0.0);
    }
    Ok(Normal::new(0.0, sigma).map_err(|e| FelmError::InvalidConfig(e.to_string()))?.sample(rng))
}

/// Runs the mission until every circuit is done or the step cap is hit.
/// A timeout is reported through `summary.failure` with the partial log.
pub fn run_mission(cfg: &MissionConfig, classifier: &dyn ContourClassifier) -> Result<MissionLog> {
    cfg.validate()?;
    let th = &cfg.thresholds;
    let ctl = &cfg.controllers;
    let side = cfg.direction.side();
    let mut noise = stream(cfg.seed, streams::NOISE);

    let mut state = start_pose(cfg);
    let compass0 = wrap_degrees(state.heading + gaussian(&mut noise, cfg.compass_noise)?);
    // align with the tank axis that puts a wall on the sonar side
    let axis = side.following_heading(side.wall_for_heading(compass0));
    let mut beta_ref = heading_reference(compass0, angle_error(axis, compass0));
    let mut wall = side.wall_for_heading(beta_ref);
    let turn_sign = -side.sign();

    let mut d_ref = cfg.depths[0];
    let mut mode = Mode::Follow;
    let mut captured = false;
    let (mut turns, mut circuits) = (0usize, 0usize);
    let mut window = ClassScoreWindow::new(cfg.smoothing);
    let (mut corner_streak, mut clear_streak, mut settle) = (0usize, 0usize, 0usize);
    let (mut heading_state, mut depth_state, mut edge_state) = (FpdState::default(), FpdState::default(), FpdState::default());
    let (mut edge_was_active, mut depth_was_active) = (false, false);
    let mut d_c = 0.0;
    let mut records = Vec::new();
    let mut done = false;
    let (mut approach_steps, mut approach_dir) = (0usize, 0.0);
    let cruise_speed = cfg.cruise_surge * cfg.vehicle.max_surge;

    for _ in 0..cfg.max_steps {
        let scan = simulate_sonar(&cfg.tank, state.x, state.y, state.heading, side, &cfg.offsets, cfg.sonar_noise, state.t, &mut noise)?;
        let compass = wrap_degrees(state.heading + gaussian(&mut noise, cfg.compass_noise)?);
        let depth_meas = (state.depth + gaussian(&mut noise, cfg.depth_noise)?).max(0.0);

        let raw = classifier.score(&scan.ranges, scan.label)?;
        let smoothed = window.push(raw);
        let class = ContourClass::from_score(smoothed, th.class_threshold);
        if class == ContourClass::Corner {
            corner_streak += 1;
            clear_streak = 0;
        } else {
            corner_streak = 0;
            clear_streak += 1;
        }

        match mode {
            Mode::Follow if corner_streak >= th.corner_steps => {
                // after the turn the wall ahead is abeam, so first close or
                // open the gap to its standoff
                let misalignment = side.sign() * angle_error(compass, beta_ref);
                let gap = front_distance(&scan.ranges, &cfg.offsets, misalignment, cfg.split_margin)
                    - cfg.edge_target(cfg.direction.next_wall(wall));
                approach_steps = if cruise_speed > 0.0 { (gap.abs() / (cruise_speed * cfg.dt)).round() as usize } else { 0 };
                approach_dir = gap.signum();
                mode = Mode::Approach;
            }
            Mode::Approach if approach_steps == 0 => {
                mode = Mode::Turn;
                beta_ref = wrap_degrees(beta_ref + turn_sign * 90.0);
            }
            Mode::Turn if angle_error(beta_ref, compass).abs() < th.heading && clear_streak >= th.corner_steps => {
                turns += 1;
                wall = cfg.direction.next_wall(wall);
                captured = false;
                mode = Mode::Follow;
                if turns % 4 == 0 {
                    circuits += 1;
                    if circuits >= cfg.circuits {
                        done = true;
                    } else {
                        let next = cfg.depths[circuits % cfg.depths.len()];
                        if next != d_ref {
                            d_ref = next;
                            settle = 0;
                            mode = Mode::DepthChange;
                        }
                    }
                }
            }
            Mode::DepthChange if settle >= cfg.settle_steps => mode = Mode::Follow,
            _ => {}
        }

        let heading_err = angle_error(beta_ref, compass);
        let depth_err = d_ref - depth_meas;
        let p = Predicates {
            heading_off: heading_err.abs() >= th.heading,
            depth_off: depth_err.abs() >= th.depth,
            corner: matches!(mode, Mode::Approach | Mode::Turn),
        };
        let mut behaviors = behavior_table(p);
        if mode == Mode::DepthChange {
            // station keeping: hold heading, no edge correction without surge
            behaviors.edge = false;
            settle = if p.depth_off { 0 } else { settle + 1 };
        }

        let d_w = cfg.edge_target(wall);
        let mut offset = 0.0;
        if behaviors.edge {
            // abeam range projected onto the wall normal
            let misalignment = angle_error(compass, beta_ref).to_radians();
            let abeam = scan.ranges[0] * misalignment.cos();
            if edge_was_active {
                d_c += cfg.edge_filter * (abeam - d_c);
            } else {
                edge_state.reset();
                d_c = abeam;
            }
            let (u, next) = controller_step_error(&ctl.edge, &edge_state, d_w - d_c)?;
            edge_state = next;
            offset = -side.sign() * u * cfg.max_edge_offset;
        }
        edge_was_active = behaviors.edge;
        let (u_yaw, next) = controller_step_error(&ctl.heading, &heading_state, angle_error(wrap_degrees(beta_ref + offset), compass))?;
        heading_state = next;

        let mut u_heave = 0.0;
        if behaviors.depth {
            if !depth_was_active {
                depth_state.reset();
            }
            let (u, next) = controller_step_error(&ctl.depth, &depth_state, depth_err)?;
            depth_state = next;
            u_heave = u;
        }
        depth_was_active = behaviors.depth;

        let u_surge = match mode {
            Mode::Follow => cfg.cruise_surge,
            Mode::Approach => {
                approach_steps = approach_steps.saturating_sub(1);
                approach_dir * cfg.cruise_surge
            }
            _ => 0.0,
        };
        let commands = Commands { yaw: u_yaw, surge: u_surge, heave: u_heave };

        let edge_error = behaviors.edge.then(|| d_w - cfg.tank.wall_distance(wall, state.x, state.y));
        if let Some(e) = edge_error {
            captured |= e.abs() <= cfg.capture_tolerance;
        }

        let outcome = step_vehicle(&state, &commands, cfg.dt, &cfg.vehicle, &cfg.tank)?;
        records.push(StepRecord {
            state,
            ranges: scan.ranges,
            raw_score: raw,
            smoothed_score: smoothed,
            class: class.label(),
            truth: scan.label.label(),
            behaviors,
            commands,
            wall: wall.id(),
            mode,
            depth_ref: d_ref,
            edge_error,
            following: edge_error.is_some() && mode == Mode::Follow && captured,
            collision: outcome.collision,
            circuit: circuits,
        });
        state = outcome.state;
        if done {
            break;
        }
    }

    let failure = (!done).then(|| format!("timeout after {} steps", cfg.max_steps));
    let summary = MissionSummary::from_records(&records, cfg.circuits, failure);
    Ok(MissionLog { records, summary })
}

/// Depth error trace of an always-on depth controller driving the vehicle
/// from `from` to `to`.
pub fn depth_step_response(cfg: &FpdConfig, limits: &VehicleLimits, tank: &TankGeometry, dt: f64, from: f64, to: f64, steps: usize) -> Result<Vec<f64>> {
    cfg.validate()?;
    let mut state = VehicleState { x: 0.5 * tank.width, y: 0.5 * tank.length, depth: from, ..VehicleState::default() };
    let mut ctl = FpdState::default();
    let mut errors = Vec::with_capacity(steps);
    for _ in 0..steps {
        let e = to - state.depth;
        errors.push(e);
        let (u, next) = controller_step_error(cfg, &ctl, e)?;
        ctl = next;
        state = step_vehicle(&state, &Commands { heave: u, ..Commands::default() }, dt, limits, tank)?.state;
    }
    Ok(errors)
}
